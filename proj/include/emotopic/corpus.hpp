#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "diag.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "lemmatizer.hpp"
#include "text.hpp"
#include "tsv.hpp"

namespace emotopic {

struct ReviewRecord {
    std::string app_id;
    std::string review_id;
    std::string title;
    std::string body;
    int rating = 0;
    std::string language;  // BCP-47
    std::string country;   // ISO-3166 alpha-2
    std::string date;      // YYYY-MM-DD

    // Title plus body, whitespace-token count.
    std::size_t word_count() const {
        return text::whitespace_word_count(title) + text::whitespace_word_count(body);
    }

    friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

struct Corpus {
    std::vector<ReviewRecord> records;
    std::string provenance;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class ReviewFormat { jsonl, tsv };

inline constexpr std::array<std::string_view, 8> kReviewFields = {
    "app_id", "review_id", "title", "body", "rating", "language", "country", "date"};

namespace detail {

inline bool is_iso_date(std::string_view d) {
    if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
    int month = (d[5] - '0') * 10 + (d[6] - '0');
    int day = (d[8] - '0') * 10 + (d[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline void validate_record(const ReviewRecord& r, std::size_t line) {
    auto fail = [&](std::string_view field, const std::string& why) {
        throw ParseError("field '" + std::string(field) + "': " + why, line);
    };
    if (r.review_id.empty()) fail("review_id", "empty");
    if (r.app_id.empty()) fail("app_id", "empty");
    if (r.rating < 1 || r.rating > 5) fail("rating", "out of range [1,5]: " + std::to_string(r.rating));
    if (r.title.empty() && r.body.empty()) fail("body", "title and body both empty");
    if (r.language.empty()) fail("language", "empty");
    if (r.country.size() != 2) fail("country", "not an ISO-3166 alpha-2 code: '" + r.country + "'");
    if (!is_iso_date(r.date)) fail("date", "not an ISO-8601 date: '" + r.date + "'");
}

inline ReviewRecord record_from_json(const nlohmann::json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError("record is not a JSON object", line);
    ReviewRecord r;
    auto str = [&](std::string_view key) -> std::string {
        auto it = j.find(std::string(key));
        if (it == j.end()) throw ParseError("missing field '" + std::string(key) + "'", line);
        if (!it->is_string()) throw ParseError("field '" + std::string(key) + "': expected string", line);
        return it->get<std::string>();
    };
    r.app_id = str("app_id");
    r.review_id = str("review_id");
    r.title = str("title");
    r.body = str("body");
    auto it = j.find("rating");
    if (it == j.end()) throw ParseError("missing field 'rating'", line);
    if (!it->is_number_integer()) throw ParseError("field 'rating': expected integer", line);
    r.rating = it->get<int>();
    r.language = str("language");
    r.country = str("country");
    r.date = str("date");
    return r;
}

inline nlohmann::ordered_json record_to_json(const ReviewRecord& r) {
    nlohmann::ordered_json j;
    j["app_id"] = r.app_id;
    j["review_id"] = r.review_id;
    j["title"] = r.title;
    j["body"] = r.body;
    j["rating"] = r.rating;
    j["language"] = r.language;
    j["country"] = r.country;
    j["date"] = r.date;
    return j;
}

inline void check_unique(const std::vector<ReviewRecord>& records) {
    std::unordered_set<std::string> seen;
    std::vector<std::string> dups;
    for (const auto& r : records)
        if (!seen.insert(r.review_id).second) dups.push_back(r.review_id);
    if (!dups.empty()) {
        std::string msg = "duplicate review_id:";
        for (const auto& d : dups) msg += " " + d;
        throw IntegrityError(msg, dups);
    }
}

} // namespace detail

inline Corpus read_reviews(std::istream& in, ReviewFormat format) {
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    if (format == ReviewFormat::jsonl) {
        while (tsv::read_line(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what(), lineno, line);
            }
            auto r = detail::record_from_json(j, lineno);
            detail::validate_record(r, lineno);
            corpus.records.push_back(std::move(r));
        }
    } else {
        if (!tsv::read_line(in, line)) throw ParseError("missing TSV header", 1);
        ++lineno;
        auto header = tsv::split(line);
        std::array<std::size_t, kReviewFields.size()> col{};
        for (std::size_t f = 0; f < kReviewFields.size(); ++f) {
            auto it = std::find(header.begin(), header.end(), kReviewFields[f]);
            if (it == header.end()) throw ParseError("TSV header lacks '" + std::string(kReviewFields[f]) + "'", 1);
            col[f] = static_cast<std::size_t>(it - header.begin());
        }
        while (tsv::read_line(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto cells = tsv::split(line);
            if (cells.size() != header.size())
                throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                                     std::to_string(cells.size()),
                                 lineno, line);
            auto cell = [&](std::size_t f) { return tsv::unescape(cells[col[f]]); };
            ReviewRecord r;
            r.app_id = cell(0);
            r.review_id = cell(1);
            r.title = cell(2);
            r.body = cell(3);
            r.rating = static_cast<int>(tsv::parse_int(cells[col[4]], lineno, "rating"));
            r.language = cell(5);
            r.country = cell(6);
            r.date = cell(7);
            detail::validate_record(r, lineno);
            corpus.records.push_back(std::move(r));
        }
    }
    detail::check_unique(corpus.records);
    corpus.provenance = "loaded";
    return corpus;
}

inline ReviewFormat format_for_path(const std::string& path) {
    auto ends = [&](std::string_view s) { return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0; };
    if (ends(".tsv")) return ReviewFormat::tsv;
    return ReviewFormat::jsonl;
}

inline Corpus load_reviews(const std::string& path, ReviewFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open reviews file: " + path);
    auto corpus = read_reviews(in, format);
    corpus.provenance = "loaded from " + path;
    return corpus;
}

inline Corpus load_reviews(const std::string& path) { return load_reviews(path, format_for_path(path)); }

inline void write_reviews(std::ostream& out, const Corpus& corpus, ReviewFormat format) {
    if (format == ReviewFormat::jsonl) {
        for (const auto& r : corpus.records) out << detail::record_to_json(r).dump() << '\n';
        return;
    }
    std::vector<std::string> header(kReviewFields.begin(), kReviewFields.end());
    out << tsv::join(header) << '\n';
    for (const auto& r : corpus.records)
        out << tsv::join({tsv::escape(r.app_id), tsv::escape(r.review_id), tsv::escape(r.title), tsv::escape(r.body),
                          std::to_string(r.rating), tsv::escape(r.language), tsv::escape(r.country),
                          tsv::escape(r.date)})
            << '\n';
}

inline void save_reviews(const std::string& path, const Corpus& corpus, ReviewFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write reviews file: " + path);
    write_reviews(out, corpus, format);
}

// BCP-47 match: a bare language ("en") matches any region ("en-US"); tags
// with a region must match exactly. Case-insensitive.
inline bool language_matches(std::string_view tag, std::string_view wanted) {
    auto lt = text::to_lower_ascii(tag);
    auto lw = text::to_lower_ascii(wanted);
    std::replace(lt.begin(), lt.end(), '_', '-');
    std::replace(lw.begin(), lw.end(), '_', '-');
    if (lt == lw) return true;
    if (lw.find('-') != std::string::npos) return false;
    return lt.size() > lw.size() && lt.compare(0, lw.size(), lw) == 0 && lt[lw.size()] == '-';
}

inline Corpus filter_for_modeling(const Corpus& corpus, std::size_t min_words, std::string_view language) {
    Corpus out;
    for (const auto& r : corpus.records)
        if (language_matches(r.language, language) && r.word_count() >= min_words) out.records.push_back(r);
    out.provenance = corpus.provenance + "; filter(language=" + std::string(language) +
                     ", min_words=" + std::to_string(min_words) + ")";
    return out;
}

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct CorpusSplit {
    Corpus train;
    Corpus val;
    Corpus test;
};

// Deterministic Fisher-Yates driven by splitmix64, so the permutation does
// not depend on the standard library's distribution implementations.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::uint64_t state = seed;
    for (std::size_t i = n; i > 1; --i) {
        state = splitmix64(state);
        // Multiply-shift reduction to [0, i).
        auto j = static_cast<std::size_t>((static_cast<unsigned __int128>(state) * i) >> 64);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

inline CorpusSplit split_corpus(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
    if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
        throw ConfigError("split ratios must be positive");
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");
    const std::size_t n = corpus.size();
    auto take = [n](double r) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9)); };
    const std::size_t n_val = take(ratios.val);
    const std::size_t n_test = take(ratios.test);

    auto perm = seeded_permutation(n, seed);
    std::vector<int> bucket(n, 0);
    for (std::size_t k = 0; k < n; ++k) bucket[perm[k]] = k < n_val ? 1 : (k < n_val + n_test ? 2 : 0);

    CorpusSplit s;
    for (std::size_t i = 0; i < n; ++i) {
        Corpus& dst = bucket[i] == 0 ? s.train : (bucket[i] == 1 ? s.val : s.test);
        dst.records.push_back(corpus.records[i]);
    }
    auto tag = [&](const char* name) {
        return corpus.provenance + "; split(" + name + ", seed=" + std::to_string(seed) + ")";
    };
    s.train.provenance = tag("train");
    s.val.provenance = tag("val");
    s.test.provenance = tag("test");
    return s;
}

// ---------------------------------------------------------------------------
// Preprocessing

struct TokenizedDoc {
    std::string review_id;
    std::vector<std::string> raw_tokens;
    std::vector<std::string> model_tokens;
    bool flagged = false;  // no model tokens survived

    friend bool operator==(const TokenizedDoc&, const TokenizedDoc&) = default;
};

// review_id -> POS tag per raw token index.
using PosAnnotations = std::unordered_map<std::string, std::map<std::size_t, std::string>>;

inline PosAnnotations load_pos_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open POS sidecar: " + path);
    PosAnnotations pos;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = tsv::split(line);
        if (f.size() != 3) throw ParseError("POS sidecar: expected review_id, token_index, pos_tag", lineno);
        if (lineno == 1 && f[1] == "token_index") continue;
        pos[f[0]][static_cast<std::size_t>(tsv::parse_int(f[1], lineno, "token_index"))] = f[2];
    }
    return pos;
}

// Penn ("NN", "NNS", "NNP", "NNPS") and Universal ("NOUN", "PROPN") noun tags.
inline bool is_noun_tag(std::string_view tag) {
    return tag.starts_with("NN") || tag == "NOUN" || tag == "PROPN";
}

inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword list: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (tsv::read_line(in, line)) {
        auto w = text::to_lower_ascii(line);
        while (!w.empty() && std::isspace(static_cast<unsigned char>(w.back()))) w.pop_back();
        if (!w.empty() && w[0] != '#') words.insert(w);
    }
    return words;
}

struct PreprocessConfig {
    std::unordered_set<std::string> stopwords;
    Lemmatizer lemmatizer;
    const PosAnnotations* pos = nullptr;  // noun filtering only when set
};

inline TokenizedDoc preprocess(const ReviewRecord& record, const PreprocessConfig& config) {
    TokenizedDoc doc;
    doc.review_id = record.review_id;
    doc.raw_tokens = text::tokenize(record.title + "\n" + record.body);

    const std::map<std::size_t, std::string>* tags = nullptr;
    if (config.pos) {
        if (auto it = config.pos->find(record.review_id); it != config.pos->end()) tags = &it->second;
    }
    for (std::size_t i = 0; i < doc.raw_tokens.size(); ++i) {
        const auto& tok = doc.raw_tokens[i];
        if (config.stopwords.contains(tok) || text::is_number(tok)) continue;
        if (tags) {
            auto t = tags->find(i);
            if (t == tags->end() || !is_noun_tag(t->second)) continue;
        }
        auto lemma = config.lemmatizer.lemma(tok);
        if (lemma.empty() || config.stopwords.contains(lemma) || text::is_number(lemma)) continue;
        doc.model_tokens.push_back(std::move(lemma));
    }
    doc.flagged = doc.model_tokens.empty();
    return doc;
}

inline std::vector<TokenizedDoc> preprocess_all(const Corpus& corpus, const PreprocessConfig& config) {
    if (!config.pos) diag::warn("no POS sidecar supplied; noun filtering skipped");
    std::vector<TokenizedDoc> docs;
    docs.reserve(corpus.size());
    std::size_t flagged = 0;
    for (const auto& r : corpus.records) {
        docs.push_back(preprocess(r, config));
        flagged += docs.back().flagged;
    }
    if (flagged) diag::warn(std::to_string(flagged) + " review(s) have no model tokens after preprocessing");
    return docs;
}

// tokens.tsv: review_id, flagged, raw tokens, model tokens (space-separated).
inline void save_tokens(const std::string& path, const std::vector<TokenizedDoc>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write tokens file: " + path);
    auto joined = [](const std::vector<std::string>& v) { return tsv::join(v, ' '); };
    out << "review_id\tflagged\traw_tokens\tmodel_tokens\n";
    for (const auto& d : docs)
        out << tsv::escape(d.review_id) << '\t' << (d.flagged ? 1 : 0) << '\t' << joined(d.raw_tokens) << '\t'
            << joined(d.model_tokens) << '\n';
}

inline std::vector<TokenizedDoc> load_tokens(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open tokens file: " + path);
    std::vector<TokenizedDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    auto words = [](const std::string& s) {
        std::vector<std::string> out;
        if (!s.empty())
            for (auto& w : tsv::split(s, ' '))
                if (!w.empty()) out.push_back(std::move(w));
        return out;
    };
    while (tsv::read_line(in, line)) {
        if (++lineno == 1) continue;
        if (line.empty()) continue;
        auto f = tsv::split(line);
        if (f.size() != 4) throw ParseError("tokens file: expected 4 columns", lineno);
        TokenizedDoc d;
        d.review_id = tsv::unescape(f[0]);
        d.flagged = f[1] == "1";
        d.raw_tokens = words(f[2]);
        d.model_tokens = words(f[3]);
        docs.push_back(std::move(d));
    }
    return docs;
}

} // namespace emotopic
