#pragma once

// Stage orchestration: acquisition -> pattern identification -> lexicon
// filtering -> theory building, as individually runnable stages that
// exchange files under one output directory. Every stage writes a manifest
// with the content hashes of its inputs and outputs plus the configuration
// it depends on; a stage whose manifest still matches is skipped.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "appstore.hpp"
#include "cluster.hpp"
#include "coherence.hpp"
#include "corpus.hpp"
#include "ctfidf.hpp"
#include "embeddings.hpp"
#include "emotion.hpp"
#include "error.hpp"
#include "framework.hpp"
#include "hash.hpp"
#include "pca.hpp"
#include "report.hpp"
#include "stats.hpp"

namespace emotopic {

namespace fs = std::filesystem;

enum class Stage { fetch, ingest, split, preprocess, embed, topics, emotions, map, stats, report };

inline constexpr std::array<Stage, 9> kAllStages = {Stage::ingest, Stage::split,    Stage::preprocess,
                                                    Stage::embed,  Stage::topics,   Stage::emotions,
                                                    Stage::map,    Stage::stats,    Stage::report};

inline std::string_view stage_name(Stage s) {
    switch (s) {
    case Stage::fetch: return "fetch";
    case Stage::ingest: return "ingest";
    case Stage::split: return "split";
    case Stage::preprocess: return "preprocess";
    case Stage::embed: return "embed";
    case Stage::topics: return "topics";
    case Stage::emotions: return "emotions";
    case Stage::map: return "map";
    case Stage::stats: return "stats";
    case Stage::report: return "report";
    }
    return "?";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
    for (auto st : {Stage::fetch, Stage::ingest, Stage::split, Stage::preprocess, Stage::embed, Stage::topics,
                    Stage::emotions, Stage::map, Stage::stats, Stage::report})
        if (stage_name(st) == s) return st;
    return std::nullopt;
}

inline std::vector<Stage> stage_dependencies(Stage s) {
    switch (s) {
    case Stage::fetch:
    case Stage::ingest: return {};
    case Stage::split: return {Stage::ingest};
    case Stage::preprocess: return {Stage::split};
    case Stage::embed: return {Stage::preprocess};
    case Stage::topics: return {Stage::preprocess, Stage::embed};
    case Stage::emotions: return {Stage::preprocess};
    case Stage::map: return {Stage::topics};
    case Stage::stats: return {Stage::topics, Stage::emotions, Stage::map};
    case Stage::report: return {Stage::topics, Stage::stats};
    }
    return {};
}

struct PipelineConfig {
    // Inputs
    std::string corpus;           // reviews.jsonl / .tsv; defaults to the fetch output
    std::string embeddings;       // optional external .emb
    std::string emotions;         // optional external emotions.tsv
    std::string assignments;      // optional precomputed clustering
    std::string lexicon;
    std::string stopwords;
    std::string lemmas;
    std::string emotion_keywords;
    std::string pos;              // optional POS sidecar
    std::string mapping;          // annotator A
    std::string mapping_b;        // optional annotator B
    std::string annotator = "A";
    std::string out_dir = "out";

    std::optional<std::uint64_t> seed;
    std::size_t min_words = 25;
    std::string language = "en";
    SplitRatios ratios;
    std::size_t embed_dim = 256;
    std::size_t reduce_dim = 48;
    double eps = 0.6;
    std::size_t min_pts = 5;
    std::size_t topic_lo = 10;
    std::size_t topic_hi = 50;
    double diversity_min = 0.7;
    std::size_t top_n = 10;
    double alpha = 0.05;
    double band_lo = -1.0;
    double band_hi = 1.0;
    double bin_width = 0.25;
    bool interactive = false;

    // fetch
    std::vector<std::string> app_ids;
    std::vector<std::string> countries = {"us"};
    int max_pages = 10;
    std::string fetch_language = "und";
    std::string cache_dir;
};

// Stage context: config plus I/O hooks so tests can drive interactive stages.
struct PipelineContext {
    PipelineConfig config;
    appstore::Transport transport;  // required for fetch
    std::istream* in = &std::cin;
    std::ostream* out = &std::cout;
};

namespace pipeline_detail {

inline fs::path out(const PipelineConfig& c) { return fs::path(c.out_dir); }
inline fs::path manifest_path(const PipelineConfig& c, Stage s) {
    return out(c) / "manifests" / (std::string(stage_name(s)) + ".json");
}

inline std::uint64_t require_seed(const PipelineConfig& c, Stage s) {
    if (!c.seed) throw ConfigError("--seed is required for stage '" + std::string(stage_name(s)) + "'");
    return *c.seed;
}

inline nlohmann::ordered_json stage_config(const PipelineConfig& c, Stage s) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    switch (s) {
    case Stage::fetch:
        j["app_ids"] = c.app_ids;
        j["countries"] = c.countries;
        j["max_pages"] = c.max_pages;
        j["fetch_language"] = c.fetch_language;
        break;
    case Stage::ingest: break;
    case Stage::split:
        j["seed"] = c.seed.value_or(0);
        j["ratios"] = {c.ratios.train, c.ratios.val, c.ratios.test};
        break;
    case Stage::preprocess:
        j["min_words"] = c.min_words;
        j["language"] = c.language;
        break;
    case Stage::embed:
        j["seed"] = c.seed.value_or(0);
        j["embed_dim"] = c.embed_dim;
        break;
    case Stage::topics:
        j["seed"] = c.seed.value_or(0);
        j["reduce_dim"] = c.reduce_dim;
        j["eps"] = c.eps;
        j["min_pts"] = c.min_pts;
        j["topic_range"] = {c.topic_lo, c.topic_hi};
        j["diversity_min"] = c.diversity_min;
        j["top_n"] = c.top_n;
        break;
    case Stage::emotions: break;
    case Stage::map:
        j["annotator"] = c.annotator;
        break;
    case Stage::stats:
        j["alpha"] = c.alpha;
        j["band"] = {c.band_lo, c.band_hi};
        break;
    case Stage::report:
        j["bin_width"] = c.bin_width;
        j["top_n"] = c.top_n;
        break;
    }
    return j;
}

struct StageFiles {
    std::vector<std::string> inputs;   // absolute or config-relative paths
    std::vector<std::string> outputs;  // relative to out_dir
};

inline nlohmann::ordered_json digest_map(const std::vector<std::string>& paths, const fs::path& base) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& p : paths) j[p] = file_digest((base / p).string());
    return j;
}

inline nlohmann::ordered_json read_json(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DependencyError("missing artifact: " + p.string());
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("invalid JSON in " + p.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

inline nlohmann::ordered_json sig_to_json(const SignificanceResult& r) {
    auto j = to_json(r);
    j["degenerate"] = r.degenerate;
    return j;
}

inline SignificanceResult sig_from_json(const nlohmann::ordered_json& j) {
    SignificanceResult r;
    r.n = j.at("n").get<std::size_t>();
    r.mean = j.at("mean").get<double>();
    r.t = j.at("t").is_null() ? 0.0 : j.at("t").get<double>();
    r.df = j.at("df").get<std::size_t>();
    r.p = j.at("p").get<double>();
    r.p_corrected = j.at("p_corrected").get<double>();
    r.significant = j.at("significant").get<bool>();
    r.degenerate = j.value("degenerate", false);
    return r;
}

inline std::vector<std::string> corpus_ids(const Corpus& c) {
    std::vector<std::string> ids;
    for (const auto& r : c.records) ids.push_back(r.review_id);
    return ids;
}

} // namespace pipeline_detail

struct StageOutcome {
    Stage stage;
    bool skipped = false;  // manifest up to date
    std::vector<std::string> outputs;
};

class Pipeline {
public:
    explicit Pipeline(PipelineContext ctx) : ctx_(std::move(ctx)) {}

    const PipelineConfig& config() const noexcept { return ctx_.config; }

    StageOutcome run(Stage s) {
        namespace pd = pipeline_detail;
        check_dependencies(s);
        auto files = plan(s);
        const auto base = pd::out(config());
        nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
        for (const auto& p : files.inputs) inputs[input_key(p)] = file_digest(p);
        const auto cfg = pd::stage_config(config(), s);

        if (up_to_date(s, inputs, cfg)) return {s, true, files.outputs};

        fs::create_directories(base);
        execute(s);

        nlohmann::ordered_json m;
        m["stage"] = stage_name(s);
        m["seed"] = config().seed ? nlohmann::ordered_json(*config().seed) : nlohmann::ordered_json(nullptr);
        m["config"] = cfg;
        m["inputs"] = inputs;
        m["outputs"] = pd::digest_map(files.outputs, base);
        pd::write_json(pd::manifest_path(config(), s), m);
        return {s, false, files.outputs};
    }

    std::vector<StageOutcome> run_all() {
        std::vector<StageOutcome> out;
        for (auto s : kAllStages) out.push_back(run(s));
        return out;
    }

private:
    PipelineContext ctx_;

    fs::path path(std::string_view rel) const { return pipeline_detail::out(config()) / rel; }

    // Artifacts inside out_dir are keyed relative to it so manifests do not
    // depend on where the output directory lives.
    std::string input_key(const std::string& p) const {
        const auto base = fs::weakly_canonical(pipeline_detail::out(config()));
        const auto full = fs::weakly_canonical(p);
        auto rel = full.lexically_relative(base);
        if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
        return p;
    }

    std::string corpus_input() const {
        if (!config().corpus.empty()) return config().corpus;
        return path("raw/reviews.jsonl").string();
    }

    pipeline_detail::StageFiles plan(Stage s) const {
        const auto& c = config();
        auto opt = [](std::vector<std::string> v) {
            v.erase(std::remove(v.begin(), v.end(), std::string{}), v.end());
            return v;
        };
        switch (s) {
        case Stage::fetch: return {{}, {"raw/reviews.jsonl", "raw/fetch_status.tsv"}};
        case Stage::ingest: return {{corpus_input()}, {"corpus.jsonl"}};
        case Stage::split:
            return {{path("corpus.jsonl").string()}, {"split/train.jsonl", "split/val.jsonl", "split/test.jsonl"}};
        case Stage::preprocess:
            return {opt({path("split/train.jsonl").string(), c.stopwords, c.lemmas, c.pos}),
                    {"modeling.jsonl", "tokens.tsv"}};
        case Stage::embed:
            return {opt({path("tokens.tsv").string(), c.embeddings}), {"embeddings.emb", "embeddings.emb.ids"}};
        case Stage::topics:
            return {opt({path("tokens.tsv").string(), path("embeddings.emb").string(), c.assignments}),
                    {"topics/assignments.tsv", "topics/top_terms.tsv", "topics/curve.tsv", "topics/meta.json",
                     "topics/reduced.emb", "topics/reduced.emb.ids"}};
        case Stage::emotions:
            return {opt({path("modeling.jsonl").string(), c.lexicon, c.emotions, c.emotions.empty() ? c.emotion_keywords : ""}),
                    {"emotions/emotions.tsv", "emotions/points.tsv", "emotions/meta.json"}};
        case Stage::map:
            return {opt({path("topics/top_terms.tsv").string(), c.mapping, c.mapping_b}), {"mapping.tsv"}};
        case Stage::stats:
            return {{path("topics/assignments.tsv").string(), path("emotions/points.tsv").string(),
                     path("mapping.tsv").string()},
                    {"stats/stats.tsv", "stats/summary.json", "stats/hypotheses.json", "stats/hypotheses.txt"}};
        case Stage::report: {
            std::vector<std::string> outs;
            for (const char* name : {"topics", "valence", "domains", "activation", "hypotheses"})
                for (const char* ext : {".tsv", ".md"}) outs.push_back(std::string("reports/") + name + ext);
            outs.push_back("reports/fig5_histogram.tsv");
            outs.push_back("reports/fig3_curve.tsv");
            return {{path("stats/summary.json").string(), path("topics/top_terms.tsv").string(),
                     path("topics/curve.tsv").string(), path("mapping.tsv").string()},
                    outs};
        }
        }
        return {};
    }

    void check_dependencies(Stage s) const {
        for (auto dep : stage_dependencies(s))
            if (!fs::exists(pipeline_detail::manifest_path(config(), dep)))
                throw DependencyError("stage '" + std::string(stage_name(s)) + "' needs the output of '" +
                                      std::string(stage_name(dep)) + "'; run `emotopic run " +
                                      std::string(stage_name(dep)) + "` first");
        if (s == Stage::ingest && config().corpus.empty() && !fs::exists(corpus_input()))
            throw DependencyError("no corpus configured and no fetched reviews; set --corpus or run `emotopic run fetch` first");
    }

    bool up_to_date(Stage s, const nlohmann::ordered_json& inputs, const nlohmann::ordered_json& cfg) const {
        namespace pd = pipeline_detail;
        const auto mp = pd::manifest_path(config(), s);
        if (!fs::exists(mp)) return false;
        nlohmann::ordered_json m;
        try {
            m = pd::read_json(mp);
        } catch (const Error&) {
            return false;
        }
        if (m.value("config", nlohmann::ordered_json{}) != cfg || m.value("inputs", nlohmann::ordered_json{}) != inputs)
            return false;
        const auto outputs = m.value("outputs", nlohmann::ordered_json::object());
        for (const auto& [rel, digest] : outputs.items())
            if (file_digest(path(rel).string()) != digest.get<std::string>()) return false;
        return true;
    }

    void execute(Stage s) {
        switch (s) {
        case Stage::fetch: return do_fetch();
        case Stage::ingest: return do_ingest();
        case Stage::split: return do_split();
        case Stage::preprocess: return do_preprocess();
        case Stage::embed: return do_embed();
        case Stage::topics: return do_topics();
        case Stage::emotions: return do_emotions();
        case Stage::map: return do_map();
        case Stage::stats: return do_stats();
        case Stage::report: return do_report();
        }
    }

    // -- stages -------------------------------------------------------------

    void do_fetch() {
        const auto& c = config();
        if (c.app_ids.empty()) throw ConfigError("fetch needs at least one --app-id");
        if (!ctx_.transport) throw ConfigError("fetch needs an HTTP transport");
        appstore::Transport transport = ctx_.transport;
        if (!c.cache_dir.empty()) {
            auto cached = std::make_shared<appstore::CachedTransport>(transport, c.cache_dir);
            transport = [cached](const std::string& url) { return (*cached)(url); };
        }
        Corpus corpus;
        std::vector<appstore::CountryFetchStatus> status;
        appstore::FetchOptions opts{c.max_pages, c.fetch_language};
        for (const auto& app : c.app_ids) {
            auto records = appstore::fetch_reviews_multi(transport, app, c.countries, opts, status);
            corpus.records.insert(corpus.records.end(), records.begin(), records.end());
        }
        detail::check_unique(corpus.records);
        fs::create_directories(path("raw"));
        save_reviews(path("raw/reviews.jsonl").string(), corpus, ReviewFormat::jsonl);
        std::ofstream st(path("raw/fetch_status.tsv"), std::ios::binary);
        st << "country\treviews\terror\n";
        for (const auto& s : status) st << s.country << '\t' << s.reviews << '\t' << tsv::escape(s.error) << '\n';
    }

    void do_ingest() {
        auto corpus = load_reviews(corpus_input());
        save_reviews(path("corpus.jsonl").string(), corpus, ReviewFormat::jsonl);
    }

    void do_split() {
        const auto seed = pipeline_detail::require_seed(config(), Stage::split);
        auto corpus = load_reviews(path("corpus.jsonl").string(), ReviewFormat::jsonl);
        auto parts = split_corpus(corpus, config().ratios, seed);
        fs::create_directories(path("split"));
        save_reviews(path("split/train.jsonl").string(), parts.train, ReviewFormat::jsonl);
        save_reviews(path("split/val.jsonl").string(), parts.val, ReviewFormat::jsonl);
        save_reviews(path("split/test.jsonl").string(), parts.test, ReviewFormat::jsonl);
    }

    PreprocessConfig preprocess_config(PosAnnotations& pos_storage) const {
        PreprocessConfig pc;
        if (!config().stopwords.empty()) pc.stopwords = load_stopwords(config().stopwords);
        if (!config().lemmas.empty()) pc.lemmatizer = Lemmatizer::from_file(config().lemmas);
        if (!config().pos.empty()) {
            pos_storage = load_pos_sidecar(config().pos);
            pc.pos = &pos_storage;
        }
        return pc;
    }

    // Filters the training split, preprocesses it and drops reviews without
    // model tokens from the modeling set.
    void do_preprocess() {
        auto train = load_reviews(path("split/train.jsonl").string(), ReviewFormat::jsonl);
        auto filtered = filter_for_modeling(train, config().min_words, config().language);
        PosAnnotations pos;
        const auto pc = preprocess_config(pos);
        auto docs = preprocess_all(filtered, pc);
        Corpus modeling;
        modeling.provenance = filtered.provenance;
        std::vector<TokenizedDoc> kept;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (docs[i].flagged) continue;
            modeling.records.push_back(filtered.records[i]);
            kept.push_back(std::move(docs[i]));
        }
        if (kept.empty()) {
            std::string msg = "no reviews left for modeling after filtering and preprocessing";
            if (filtered.records.empty() && !train.records.empty() &&
                std::all_of(train.records.begin(), train.records.end(),
                            [](const ReviewRecord& r) { return r.language == "und"; }))
                msg += "; reviews have no language tag (fetch with --fetch-language, or pass --language und)";
            throw ValidationError(msg);
        }
        save_reviews(path("modeling.jsonl").string(), modeling, ReviewFormat::jsonl);
        save_tokens(path("tokens.tsv").string(), kept);
    }

    void do_embed() {
        auto docs = load_tokens(path("tokens.tsv").string());
        std::vector<std::string> ids;
        for (const auto& d : docs) ids.push_back(d.review_id);
        EmbeddingMatrix m;
        if (!config().embeddings.empty()) {
            m = load_embeddings(config().embeddings, ids);
        } else {
            m = embed_builtin(docs, config().embed_dim, pipeline_detail::require_seed(config(), Stage::embed));
        }
        save_embeddings(path("embeddings.emb").string(), m);
    }

    void do_topics() {
        const auto& c = config();
        const auto seed = pipeline_detail::require_seed(c, Stage::topics);
        auto docs = load_tokens(path("tokens.tsv").string());
        std::vector<std::string> ids;
        for (const auto& d : docs) ids.push_back(d.review_id);
        auto emb = load_embeddings(path("embeddings.emb").string(), ids);
        const auto reduce_dim = std::min(c.reduce_dim, emb.dim - 1);
        auto reduced = reduce_dim >= 2 && reduce_dim < emb.dim ? reduce_dimensions(emb, reduce_dim, seed) : emb;

        std::vector<TopicAssignment> assignments;
        if (!c.assignments.empty()) {
            auto loaded = load_assignments(c.assignments);
            std::unordered_map<std::string, int> by_id;
            for (const auto& a : loaded) by_id[a.review_id] = a.topic;
            std::vector<std::string> missing;
            for (const auto& id : ids) {
                auto it = by_id.find(id);
                if (it == by_id.end()) missing.push_back(id);
                else assignments.push_back({id, it->second});
            }
            if (!missing.empty()) throw AlignmentError("precomputed assignments miss reviews", missing);
        } else {
            assignments = cluster(reduced, {c.eps, c.min_pts});
        }

        auto model = ctfidf(docs, assignments);
        SelectionParams sp{c.topic_lo, c.topic_hi, c.diversity_min, c.top_n, kNpmiEpsilon};
        auto sel = select_topic_count(model, docs, assignments, sp);
        auto [final_model, final_assignments] = reduce_topics(model, assignments, sel.count);
        auto coherence = npmi_coherence(final_model, modeled_docs(docs, final_assignments), c.top_n);

        fs::create_directories(path("topics"));
        save_assignments(path("topics/assignments.tsv").string(), final_assignments);
        save_top_terms(path("topics/top_terms.tsv").string(), final_model, c.top_n);
        save_embeddings(path("topics/reduced.emb").string(), reduced);
        {
            std::ofstream curve(path("topics/curve.tsv"), std::ios::binary);
            curve << "topic_count\tnpmi\tdiversity\n";
            for (const auto& p : sel.curve)
                curve << p.topic_count << '\t' << tsv::format_double(p.npmi) << '\t'
                      << tsv::format_double(p.diversity) << '\n';
        }
        std::size_t outliers = 0;
        for (const auto& a : final_assignments) outliers += a.topic == kOutlier;
        nlohmann::ordered_json meta;
        meta["seed"] = seed;
        meta["A"] = final_model.avg_class_tokens;
        meta["initial_topics"] = model.num_classes();
        meta["topics"] = final_model.num_classes();
        meta["outliers"] = outliers;
        meta["npmi"] = coherence.npmi;
        meta["diversity"] = coherence.diversity;
        meta["diversity_fallback"] = sel.diversity_fallback;
        meta["params"] = pipeline_detail::stage_config(c, Stage::topics);
        meta["clustering"] = c.assignments.empty() ? "dbscan" : "precomputed";
        pipeline_detail::write_json(path("topics/meta.json"), meta);
    }

    void do_emotions() {
        const auto& c = config();
        auto modeling = load_reviews(path("modeling.jsonl").string(), ReviewFormat::jsonl);
        const auto ids = pipeline_detail::corpus_ids(modeling);
        if (c.lexicon.empty()) throw ConfigError("emotions stage needs --lexicon");
        const auto lexicon = load_lexicon(c.lexicon);

        EmotionTable table;
        if (!c.emotions.empty()) {
            table = align_emotions(load_emotions(c.emotions), ids);
        } else {
            if (c.emotion_keywords.empty()) throw ConfigError("emotions stage needs --emotions or --emotion-keywords");
            const auto scorer = KeywordEmotionScorer::from_file(c.emotion_keywords);
            table.review_ids = ids;
            for (const auto& r : modeling.records) table.rows.push_back(scorer.score(r));
        }
        auto matrix = make_emotion_matrix(table.review_ids, table.rows);
        std::vector<CircumplexPoint> points;
        for (const auto& z : matrix.z) points.push_back(review_coordinate(z, lexicon));

        fs::create_directories(path("emotions"));
        save_emotions(path("emotions/emotions.tsv").string(), matrix.review_ids, matrix.raw);
        save_points(path("emotions/points.tsv").string(), matrix.review_ids, points);
        nlohmann::ordered_json meta;
        meta["source"] = c.emotions.empty() ? "keyword-scorer" : "external";
        meta["reviews"] = matrix.rows();
        auto deg = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < kNumEmotions; ++k)
            if (matrix.degenerate[k]) deg.push_back(kEmotionCategories[k]);
        meta["degenerate_columns"] = deg;
        meta["mapped_categories"] = lexicon.mapped_count();
        pipeline_detail::write_json(path("emotions/meta.json"), meta);
    }

    void do_map() {
        const auto& c = config();
        if (c.mapping.empty()) throw ConfigError("map stage needs --mapping (an existing or new mapping file)");
        const auto top = load_top_terms(path("topics/top_terms.tsv").string());
        std::vector<int> topics;
        for (const auto& [t, _] : top) topics.push_back(t);

        auto complete_or_session = [&](const std::string& file, const std::string& annotator) {
            DomainMapping existing;
            if (fs::exists(file)) existing = load_mapping(file);
            if (existing.covers(topics)) return existing;
            if (!c.interactive)
                throw DependencyError("mapping '" + file + "' does not cover every topic; rerun `emotopic run map --interactive`");
            auto samples = presentations(top);
            auto result = mapping_session(samples, annotator, std::move(existing), *ctx_.in, *ctx_.out);
            save_mapping(file, result.mapping);
            if (!result.complete)
                throw DependencyError("mapping session stopped; progress saved to '" + file + "', rerun to resume");
            return result.mapping;
        };

        DomainMapping final = complete_or_session(c.mapping, c.annotator);
        if (!c.mapping_b.empty()) {
            DomainMapping b = complete_or_session(c.mapping_b, "B");
            TieBreak tb;
            if (c.interactive) tb = interactive_tie_break(*ctx_.in, *ctx_.out);
            auto adj = adjudicate(final, b, tb);
            final = adj.final;
        }
        // Only topics of the current model are carried forward.
        DomainMapping trimmed;
        for (int t : topics) trimmed.entries[t] = final.entries.at(t);
        save_mapping(path("mapping.tsv").string(), trimmed);
    }

    std::vector<TopicPresentation> presentations(const std::map<int, std::vector<WeightedTerm>>& top) const {
        auto modeling = load_reviews(path("modeling.jsonl").string(), ReviewFormat::jsonl);
        std::unordered_map<std::string, const ReviewRecord*> by_id;
        for (const auto& r : modeling.records) by_id[r.review_id] = &r;
        auto assignments = load_assignments(path("topics/assignments.tsv").string());
        std::vector<std::string> ids;
        for (const auto& a : assignments) ids.push_back(a.review_id);
        auto reduced = load_embeddings(path("topics/reduced.emb").string(), ids);
        std::vector<TopicPresentation> out;
        for (const auto& [topic, terms] : top) {
            TopicPresentation p;
            p.topic = topic;
            for (std::size_t i = 0; i < terms.size() && i < 10; ++i) p.top_terms.push_back(terms[i].term);
            for (const auto& id : nearest_to_centroid(reduced, assignments, topic, 3))
                if (auto it = by_id.find(id); it != by_id.end())
                    p.samples.push_back(it->second->title + " | " + it->second->body);
            out.push_back(std::move(p));
        }
        return out;
    }

    void do_stats() {
        namespace pd = pipeline_detail;
        const auto& c = config();
        auto assignments = load_assignments(path("topics/assignments.tsv").string());
        auto mapping = load_mapping(path("mapping.tsv").string());
        auto [ids, pts] = load_points(path("emotions/points.tsv").string());
        const auto points = index_points(ids, pts);

        auto topics = topic_stats(points, assignments, &mapping, c.alpha);
        auto rollup = domain_rollup(assignments, mapping);
        auto dval = domain_valence(rollup, points, c.alpha);
        std::vector<double> activations;
        for (const auto& p : pts) activations.push_back(p.activation);
        auto band = neutral_band_analysis(activations, c.band_lo, c.band_hi);

        HypothesisInputs hin;
        for (const auto& [d, r] : rollup.reviews) hin.domain_counts[d] = r.size();
        hin.domain_valence = dval;
        hin.topics = topics;
        hin.reviews = band;
        auto hyp = evaluate_hypotheses(hin);

        fs::create_directories(path("stats"));
        save_topic_stats(path("stats/stats.tsv").string(), topics);

        nlohmann::ordered_json summary;
        auto jt = nlohmann::ordered_json::array();
        for (const auto& t : topics)
            jt.push_back({{"topic", t.topic},
                          {"domain", t.domain ? std::string(domain_id(*t.domain)) : std::string("-")},
                          {"n", t.n_reviews},
                          {"valence", pd::sig_to_json(t.valence)},
                          {"activation", pd::sig_to_json(t.activation)}});
        summary["topics"] = jt;
        auto jd = nlohmann::ordered_json::array();
        for (const auto& [d, r] : rollup.reviews) {
            nlohmann::ordered_json row = {{"domain", domain_id(d)}, {"n", r.size()}};
            if (auto it = dval.find(d); it != dval.end()) row["valence"] = pd::sig_to_json(it->second);
            jd.push_back(row);
        }
        summary["domains"] = jd;
        summary["domain_valence_pooling"] = "all reviews of the domain";
        summary["outliers"] = rollup.outliers.size();
        summary["reviews"] = pts.size();
        summary["neutral_band"] = {{"lo", band.lo},           {"hi", band.hi},
                                   {"below", band.n_below},   {"above", band.n_above},
                                   {"within", band.n_within}, {"negative", band.n_negative},
                                   {"positive", band.n_positive}, {"zero", band.n_zero},
                                   {"median", band.median}};
        summary["hypotheses"] = to_json(hyp);
        pd::write_json(path("stats/summary.json"), summary);
        pd::write_json(path("stats/hypotheses.json"), to_json(hyp));

        std::ofstream txt(path("stats/hypotheses.txt"), std::ios::binary);
        auto line = [&](const char* name, const HypothesisResult& h) {
            txt << name << ": " << to_string(h.verdict) << "\n  evidence: " << h.evidence.dump() << '\n';
        };
        line("H1a", hyp.h1a);
        line("H1b", hyp.h1b);
        line("H2", hyp.h2);
    }

    void do_report() {
        namespace pd = pipeline_detail;
        const auto& c = config();
        const auto summary = pd::read_json(path("stats/summary.json"));
        const auto top = load_top_terms(path("topics/top_terms.tsv").string());
        const auto mapping = load_mapping(path("mapping.tsv").string());
        auto [ids, pts] = load_points(path("emotions/points.tsv").string());
        auto assignments = load_assignments(path("topics/assignments.tsv").string());

        ReportBundle b;
        for (const auto& [t, e] : mapping.entries) b.themes[t] = e.theme;

        std::map<int, std::size_t> sizes;
        for (const auto& a : assignments)
            if (a.topic != kOutlier) ++sizes[a.topic];
        std::vector<TopicRow> rows;
        for (const auto& [t, terms] : top) {
            TopicRow r;
            r.topic = t;
            if (auto it = mapping.entries.find(t); it != mapping.entries.end()) {
                r.theme = it->second.theme;
                r.domain = it->second.domain;
            }
            r.n_reviews = sizes[t];
            for (const auto& w : terms) r.top_terms.push_back(w.term);
            rows.push_back(std::move(r));
        }
        b.topic_table = rows;

        std::vector<TopicStats> ts;
        for (const auto& j : summary.at("topics")) {
            TopicStats s;
            s.topic = j.at("topic").get<int>();
            s.n_reviews = j.at("n").get<std::size_t>();
            s.domain = parse_domain(j.at("domain").get<std::string>());
            s.valence = pd::sig_from_json(j.at("valence"));
            s.activation = pd::sig_from_json(j.at("activation"));
            ts.push_back(s);
        }
        b.topic_stats = ts;

        std::vector<DomainRow> drows;
        for (const auto& j : summary.at("domains")) {
            DomainRow d;
            d.domain = *parse_domain(j.at("domain").get<std::string>());
            d.n_reviews = j.at("n").get<std::size_t>();
            if (j.contains("valence")) d.valence = pd::sig_from_json(j.at("valence"));
            drows.push_back(d);
        }
        std::stable_sort(drows.begin(), drows.end(),
                         [](const DomainRow& a, const DomainRow& b) { return a.n_reviews > b.n_reviews; });
        b.domain_table = drows;

        HypothesisReport hyp;
        auto verdict = [&](const char* key, HypothesisResult& h) {
            const auto& j = summary.at("hypotheses").at(key);
            const auto v = j.at("verdict").get<std::string>();
            h.verdict = v == "supported" ? Verdict::supported : v == "rejected" ? Verdict::rejected : Verdict::inconclusive;
            h.evidence = j.at("evidence");
        };
        verdict("H1a", hyp.h1a);
        verdict("H1b", hyp.h1b);
        verdict("H2", hyp.h2);
        b.hypotheses = hyp;

        std::vector<double> activations;
        for (const auto& p : pts) activations.push_back(p.activation);
        b.histogram = histogram(activations, c.bin_width);

        std::vector<CurvePoint> curve;
        {
            std::ifstream in(path("topics/curve.tsv"), std::ios::binary);
            std::string line;
            std::size_t lineno = 0;
            while (tsv::read_line(in, line)) {
                if (++lineno == 1 || line.empty()) continue;
                auto f = tsv::split(line);
                if (f.size() != 3) throw ParseError("curve.tsv: expected 3 columns", lineno);
                curve.push_back({static_cast<std::size_t>(tsv::parse_int(f[0], lineno, "topic_count")),
                                 tsv::parse_double(f[1], lineno, "npmi"), tsv::parse_double(f[2], lineno, "diversity")});
            }
        }
        b.coherence_curve = curve;

        // Render both formats in memory first so a failure writes nothing.
        auto tsv_files = render_to_strings(b, ReportFormat::tsv);
        auto md_files = render_to_strings(b, ReportFormat::markdown);
        fs::create_directories(path("reports"));
        for (const auto* files : {&tsv_files, &md_files})
            for (const auto& [name, content] : *files) {
                std::ofstream out(path("reports") / name, std::ios::binary);
                out << content;
            }
    }
};

} // namespace emotopic
