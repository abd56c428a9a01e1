// emotopic command-line front end.
//
//   emotopic run <stage> [--config file.ini] [flags]
//   emotopic save_embeddings --corpus reviews.jsonl --out x.emb --seed N
//   emotopic synth --out-dir dir --seed N
//   emotopic screen --lookup lookup.json | --app-id ID...
//
// Every pipeline flag may also be set as `key = value` in the config file;
// command-line flags win.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unistd.h>

#include <CLI11.hpp>

#include <emotopic/pipeline.hpp>
#include <emotopic/synthetic.hpp>
// After Eigen: <resolv.h> (via httplib) defines `_res` as a macro.
#include <emotopic/appstore_http.hpp>

namespace {

using namespace emotopic;

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDependency = 3;
constexpr int kExitData = 4;

std::string data_file(const char* name) { return std::string(EMOTOPIC_DATA_DIR) + "/" + name; }

void add_pipeline_options(CLI::App& app, PipelineConfig& c, std::optional<std::uint64_t>& seed) {
    app.add_option("--corpus", c.corpus, "Reviews file (.jsonl or .tsv)");
    app.add_option("--embeddings", c.embeddings, "External .emb file instead of the built-in embedder");
    app.add_option("--emotions", c.emotions, "External emotions.tsv instead of the keyword scorer");
    app.add_option("--assignments", c.assignments, "Precomputed topic assignments");
    app.add_option("--lexicon", c.lexicon, "Circumplex lexicon TSV")->capture_default_str();
    app.add_option("--stopwords", c.stopwords, "Stopword list")->capture_default_str();
    app.add_option("--lemmas", c.lemmas, "Lemma table")->capture_default_str();
    app.add_option("--emotion-keywords", c.emotion_keywords, "Keyword table for the built-in emotion scorer")
        ->capture_default_str();
    app.add_option("--pos", c.pos, "POS sidecar (review_id, token, tag)");
    app.add_option("--mapping", c.mapping, "Topic-to-domain mapping (annotator A)");
    app.add_option("--mapping-b", c.mapping_b, "Second annotator's mapping");
    app.add_option("--annotator", c.annotator, "Annotator name for new mappings")->capture_default_str();
    app.add_option("--out-dir", c.out_dir, "Artifact directory")->capture_default_str();
    app.add_option("--seed", seed, "Seed (required for split, embed, topics)");
    app.add_option("--min-words", c.min_words, "Minimum words per review")->capture_default_str();
    app.add_option("--language", c.language, "Language prefix for modeling")->capture_default_str();
    app.add_option("--train-ratio", c.ratios.train)->capture_default_str();
    app.add_option("--val-ratio", c.ratios.val)->capture_default_str();
    app.add_option("--test-ratio", c.ratios.test)->capture_default_str();
    app.add_option("--embed-dim", c.embed_dim)->capture_default_str();
    app.add_option("--reduce-dim", c.reduce_dim)->capture_default_str();
    app.add_option("--eps", c.eps, "DBSCAN radius")->capture_default_str();
    app.add_option("--min-pts", c.min_pts, "DBSCAN core threshold")->capture_default_str();
    app.add_option("--topic-lo", c.topic_lo)->capture_default_str();
    app.add_option("--topic-hi", c.topic_hi)->capture_default_str();
    app.add_option("--diversity-min", c.diversity_min)->capture_default_str();
    app.add_option("--top-n", c.top_n)->capture_default_str();
    app.add_option("--alpha", c.alpha)->capture_default_str();
    app.add_option("--band-lo", c.band_lo)->capture_default_str();
    app.add_option("--band-hi", c.band_hi)->capture_default_str();
    app.add_option("--bin-width", c.bin_width)->capture_default_str();
    app.add_flag("--interactive", c.interactive, "Allow interactive mapping sessions");
    app.add_option("--app-id", c.app_ids, "App Store ids to fetch");
    app.add_option("--country", c.countries, "Storefront country codes")->capture_default_str();
    app.add_option("--max-pages", c.max_pages)->capture_default_str();
    app.add_option("--fetch-language", c.fetch_language)->capture_default_str();
    app.add_option("--cache-dir", c.cache_dir, "On-disk HTTP cache for fetch");
}

int fail(int code, const std::string& msg) {
    std::cerr << "emotopic: " << msg << '\n';
    return code;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        return fail(kExitConfig, std::string("config error: ") + e.what());
    } catch (const DependencyError& e) {
        return fail(kExitDependency, std::string("dependency error: ") + e.what());
    } catch (const ParseError& e) {
        return fail(kExitData, std::string("parse error: ") + e.what());
    } catch (const IntegrityError& e) {
        std::string msg = std::string("integrity error: ") + e.what();
        for (std::size_t i = 0; i < e.offenders().size() && i < 10; ++i) msg += "\n  " + e.offenders()[i];
        return fail(kExitData, msg);
    } catch (const ValidationError& e) {
        return fail(kExitData, std::string("validation error: ") + e.what());
    } catch (const EmptyModelError& e) {
        return fail(kExitData, std::string("empty model: ") + e.what());
    } catch (const std::exception& e) {
        return fail(kExitOther, e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emotion-annotated topic analysis of app reviews"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; flags override its values");
    app.fallthrough();

    PipelineConfig cfg;
    cfg.lexicon = data_file("circumplex_lexicon.tsv");
    cfg.stopwords = data_file("stopwords.txt");
    cfg.lemmas = data_file("lemmas.tsv");
    cfg.emotion_keywords = data_file("emotion_keywords.tsv");
    std::optional<std::uint64_t> seed;
    add_pipeline_options(app, cfg, seed);

    // run
    auto* run = app.add_subcommand("run", "Run one pipeline stage or `all`");
    std::string stage_arg;
    run->add_option("stage", stage_arg, "fetch, ingest, split, preprocess, embed, topics, emotions, map, stats, report, all")
        ->required();

    // save_embeddings
    auto* save_emb = app.add_subcommand("save_embeddings", "Embed a reviews file with the built-in embedder");
    std::string emb_out;
    save_emb->add_option("--out", emb_out, "Output .emb path")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic review corpus with planted topics");
    synthetic::SyntheticSpec spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output reviews.jsonl")->required();
    synth->add_option("--n-docs", spec.n_docs)->capture_default_str();
    synth->add_option("--n-topics", spec.n_topics)->capture_default_str();
    std::string planted_out;
    synth->add_option("--planted-out", planted_out, "Also write review_id -> planted topic TSV");

    // screen
    auto* screen = app.add_subcommand("screen", "Apply the app selection criteria to lookup results");
    std::string lookup_file;
    screen->add_option("--lookup", lookup_file, "Saved iTunes lookup JSON; fetched live from --app-id otherwise");

    CLI11_PARSE(app, argc, argv);
    cfg.seed = seed;

    if (*run) {
        return run_guarded([&] {
            PipelineContext ctx;
            ctx.config = cfg;
            ctx.config.interactive = cfg.interactive && isatty(STDIN_FILENO);
            auto limited = std::make_shared<appstore::RateLimitedTransport>(appstore::https_get,
                                                                            std::chrono::milliseconds(500));
            ctx.transport = [limited](const std::string& url) { return (*limited)(url); };
            Pipeline p(std::move(ctx));
            auto report = [](const StageOutcome& o) {
                std::cout << stage_name(o.stage) << ": " << (o.skipped ? "up to date" : "done") << '\n';
            };
            if (stage_arg == "all") {
                for (const auto& o : p.run_all()) report(o);
                return;
            }
            auto s = parse_stage(stage_arg);
            if (!s) throw ConfigError("unknown stage '" + stage_arg + "'");
            report(p.run(*s));
        });
    }

    if (*save_emb) {
        return run_guarded([&] {
            if (!seed) throw ConfigError("--seed is required for save_embeddings");
            if (cfg.corpus.empty()) throw ConfigError("save_embeddings needs --corpus");
            auto corpus = load_reviews(cfg.corpus);
            PreprocessConfig pc;
            pc.stopwords = load_stopwords(cfg.stopwords);
            pc.lemmatizer = Lemmatizer::from_file(cfg.lemmas);
            PosAnnotations pos;
            if (!cfg.pos.empty()) {
                pos = load_pos_sidecar(cfg.pos);
                pc.pos = &pos;
            }
            save_embeddings(emb_out, embed_builtin(preprocess_all(corpus, pc), cfg.embed_dim, *seed));
            std::cout << "wrote " << emb_out << " (" << corpus.size() << " x " << cfg.embed_dim << ")\n";
        });
    }

    if (*synth) {
        return run_guarded([&] {
            if (seed) spec.seed = *seed;
            auto syn = synthetic::generate(spec);
            save_reviews(synth_out, syn.corpus, format_for_path(synth_out));
            if (!planted_out.empty()) {
                std::ofstream out(planted_out, std::ios::binary);
                out << "review_id\ttopic\n";
                for (std::size_t i = 0; i < syn.corpus.records.size(); ++i)
                    out << syn.corpus.records[i].review_id << '\t' << syn.planted_topic[i] << '\n';
            }
            std::cout << "wrote " << syn.corpus.size() << " reviews to " << synth_out << '\n';
        });
    }

    if (*screen) {
        return run_guarded([&] {
            std::string payload;
            if (!lookup_file.empty()) {
                std::ifstream in(lookup_file, std::ios::binary);
                if (!in) throw ConfigError("cannot open " + lookup_file);
                payload.assign(std::istreambuf_iterator<char>(in), {});
            } else {
                if (cfg.app_ids.empty()) throw ConfigError("screen needs --lookup or --app-id");
                auto resp = appstore::https_get(appstore::lookup_url(cfg.app_ids, cfg.countries.front()));
                if (resp.status != 200) throw NetworkError("lookup failed", resp.status, resp.status >= 500);
                payload = resp.body;
            }
            auto result = appstore::screen_apps(appstore::parse_lookup_results(payload), {});
            for (const auto& a : result.included) std::cout << "include\t" << a.app_id << '\t' << a.name << '\n';
            for (const auto& e : result.excluded)
                std::cout << "exclude\t" << e.app.app_id << '\t' << e.app.name << '\t' << to_string(e.reason) << '\n';
        });
    }
    return 0;
}
