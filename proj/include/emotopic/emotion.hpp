#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "text.hpp"
#include "tsv.hpp"

namespace emotopic {

inline constexpr std::size_t kNumEmotions = 28;

// The 28 GoEmotions labels in the dataset's canonical column order.
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionCategories = {
    "admiration", "amusement",   "anger",       "annoyance",     "approval", "caring",    "confusion",
    "curiosity",  "desire",      "disappointment", "disapproval", "disgust", "embarrassment", "excitement",
    "fear",       "gratitude",   "grief",       "joy",           "love",     "nervousness", "optimism",
    "pride",      "realization", "relief",      "remorse",       "sadness",  "surprise",  "neutral"};

inline std::optional<std::size_t> emotion_index(std::string_view label) {
    const auto lower = text::to_lower_ascii(label);
    for (std::size_t i = 0; i < kNumEmotions; ++i)
        if (kEmotionCategories[i] == lower) return i;
    return std::nullopt;
}

using EmotionRow = std::array<double, kNumEmotions>;

struct CircumplexPoint {
    double valence = 0.0;     // negative .. positive
    double activation = 0.0;  // passive .. active
};

// ---------------------------------------------------------------------------
// Lexicon

struct LexiconEntry {
    std::string ontology_label;             // "-" when the row has no ontology counterpart
    std::optional<std::string> goemotions;  // canonical lowercase label
    double valence = 0.0;
    double activation = 0.0;
    bool mapped = false;
};

class CircumplexLexicon {
public:
    const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }

    // Coordinates per canonical category; empty for unmapped (realization).
    const std::optional<CircumplexPoint>& coordinate(std::size_t category) const { return coords_.at(category); }
    std::optional<CircumplexPoint> coordinate(std::string_view label) const {
        auto i = emotion_index(label);
        return i ? coords_[*i] : std::nullopt;
    }

    std::size_t mapped_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(coords_.begin(), coords_.end(), [](auto& c) { return c.has_value(); }));
    }

    static CircumplexLexicon from_entries(std::vector<LexiconEntry> entries) {
        CircumplexLexicon lex;
        std::array<bool, kNumEmotions> seen{};
        for (const auto& e : entries) {
            if (!e.goemotions) continue;
            auto idx = emotion_index(*e.goemotions);
            if (!idx) throw ValidationError("lexicon: unknown GoEmotions label '" + *e.goemotions + "'");
            if (seen[*idx]) throw ValidationError("lexicon: duplicate GoEmotions label '" + *e.goemotions + "'");
            seen[*idx] = true;
            if (e.mapped) {
                if (!std::isfinite(e.valence) || !std::isfinite(e.activation))
                    throw ValidationError("lexicon: non-finite coordinates for '" + *e.goemotions + "'");
                lex.coords_[*idx] = CircumplexPoint{e.valence, e.activation};
            }
        }
        const auto neutral = *emotion_index("neutral");
        const auto realization = *emotion_index("realization");
        if (!seen[neutral]) throw ValidationError("lexicon: missing Neutral");
        if (!lex.coords_[neutral] || lex.coords_[neutral]->valence != 0.0 || lex.coords_[neutral]->activation != 0.0)
            throw ValidationError("lexicon: Neutral must sit at (0, 0)");
        if (lex.coords_[realization]) throw ValidationError("lexicon: Realization must not carry coordinates");
        for (std::size_t i = 0; i < kNumEmotions; ++i) {
            if (!seen[i]) throw ValidationError("lexicon: missing GoEmotions label '" + std::string(kEmotionCategories[i]) + "'");
            if (i != realization && !lex.coords_[i])
                throw ValidationError("lexicon: '" + std::string(kEmotionCategories[i]) + "' has no coordinates");
        }
        lex.entries_ = std::move(entries);
        return lex;
    }

private:
    std::vector<LexiconEntry> entries_;
    std::array<std::optional<CircumplexPoint>, kNumEmotions> coords_{};
};

// lexicon.tsv: ontology_label, goemotions_label, valence, activation. "-"
// marks an absent label or coordinate. An optional header row is skipped.
inline CircumplexLexicon read_lexicon(std::istream& in) {
    std::vector<LexiconEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = tsv::split(line);
        if (f.size() != 4) throw ParseError("lexicon: expected 4 columns", lineno);
        if (lineno == 1 && f[2] == "valence") continue;
        LexiconEntry e;
        e.ontology_label = f[0];
        if (f[1] != "-") e.goemotions = text::to_lower_ascii(f[1]);
        const bool has_v = f[2] != "-", has_a = f[3] != "-";
        if (has_v != has_a) throw ParseError("lexicon: valence and activation must both be present or both '-'", lineno);
        if (has_v) {
            e.valence = tsv::parse_double(f[2], lineno, "valence");
            e.activation = tsv::parse_double(f[3], lineno, "activation");
            e.mapped = true;
        }
        entries.push_back(std::move(e));
    }
    return CircumplexLexicon::from_entries(std::move(entries));
}

inline CircumplexLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open lexicon: " + path);
    return read_lexicon(in);
}

inline void write_lexicon(std::ostream& out, const CircumplexLexicon& lex) {
    out << "ontology\tgoemotions\tvalence\tactivation\n";
    for (const auto& e : lex.entries()) {
        out << e.ontology_label << '\t' << (e.goemotions ? *e.goemotions : "-") << '\t';
        if (e.mapped)
            out << tsv::format_double(e.valence) << '\t' << tsv::format_double(e.activation);
        else
            out << "-\t-";
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Scores

struct EmotionMatrix {
    std::vector<std::string> review_ids;
    std::vector<EmotionRow> raw;                // probabilities
    std::vector<EmotionRow> z;                  // column-normalized
    std::array<bool, kNumEmotions> degenerate{};  // zero-variance columns

    std::size_t rows() const noexcept { return review_ids.size(); }
};

struct NormalizedScores {
    std::vector<EmotionRow> z;
    std::array<bool, kNumEmotions> degenerate{};
};

// Per column z = (x - mean) / sigma with the population sigma. Columns with
// sigma = 0 (up to rounding) become all-zero and are flagged degenerate.
inline NormalizedScores normalize_scores(const std::vector<EmotionRow>& raw) {
    NormalizedScores out;
    out.z.assign(raw.size(), EmotionRow{});
    const double n = static_cast<double>(raw.size());
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (std::isnan(raw[i][c]))
                throw ValidationError("NaN emotion score at row " + std::to_string(i) + ", column " +
                                      std::string(kEmotionCategories[c]));
            mean += raw[i][c];
        }
        if (raw.empty()) {
            out.degenerate[c] = true;
            continue;
        }
        mean /= n;
        double var = 0.0;
        for (const auto& r : raw) var += (r[c] - mean) * (r[c] - mean);
        const double sigma = std::sqrt(var / n);
        if (!(sigma > 1e-12 * std::max(1.0, std::abs(mean))) || !std::isfinite(sigma)) {
            out.degenerate[c] = true;
            continue;
        }
        for (std::size_t i = 0; i < raw.size(); ++i) out.z[i][c] = (raw[i][c] - mean) / sigma;
        // Re-center: removes the O(n * ulp) residue of the division.
        double zmean = 0.0;
        for (const auto& r : out.z) zmean += r[c];
        zmean /= n;
        for (auto& r : out.z) r[c] -= zmean;
    }
    return out;
}

// Weighted average over the 27 mapped categories:
//   point = (1/|M|) * sum_{e in M} z_e * (valence_e, activation_e).
// The divisor is the number of mapped categories, not the sum of weights.
inline CircumplexPoint review_coordinate(const EmotionRow& z, const CircumplexLexicon& lexicon) {
    CircumplexPoint p;
    std::size_t mapped = 0;
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
        const auto& coord = lexicon.coordinate(c);
        if (!coord) continue;
        ++mapped;
        p.valence += z[c] * coord->valence;
        p.activation += z[c] * coord->activation;
    }
    if (mapped) {
        p.valence /= static_cast<double>(mapped);
        p.activation /= static_cast<double>(mapped);
    }
    return p;
}

inline EmotionMatrix make_emotion_matrix(std::vector<std::string> ids, std::vector<EmotionRow> raw) {
    if (ids.size() != raw.size()) throw ValidationError("emotion ids/rows length mismatch");
    for (std::size_t i = 0; i < raw.size(); ++i)
        for (std::size_t c = 0; c < kNumEmotions; ++c)
            if (!(raw[i][c] >= 0.0 && raw[i][c] <= 1.0))
                throw ValidationError("emotion probability outside [0,1] for " + ids[i] + ", " +
                                      std::string(kEmotionCategories[c]));
    EmotionMatrix m;
    m.review_ids = std::move(ids);
    m.raw = std::move(raw);
    auto norm = normalize_scores(m.raw);
    m.z = std::move(norm.z);
    m.degenerate = norm.degenerate;
    return m;
}

// ---------------------------------------------------------------------------
// Built-in keyword scorer

// Each matched keyword adds one unit of mass to its category; rows are
// renormalized to sum to one. Texts with no match put all mass on neutral.
class KeywordEmotionScorer {
public:
    static KeywordEmotionScorer from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open emotion keyword list: " + path);
        KeywordEmotionScorer s;
        std::string line;
        std::size_t lineno = 0;
        while (tsv::read_line(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto f = tsv::split(line);
            if (f.size() != 2) throw ParseError("emotion keywords: expected keyword, category", lineno);
            auto idx = emotion_index(f[1]);
            if (!idx) throw ParseError("emotion keywords: unknown category '" + f[1] + "'", lineno);
            s.add(f[0], *idx);
        }
        return s;
    }

    void add(const std::string& keyword, std::size_t category) { keywords_[text::to_lower_ascii(keyword)] = category; }

    EmotionRow score(const std::vector<std::string>& tokens) const {
        EmotionRow row{};
        double total = 0.0;
        for (const auto& t : tokens)
            if (auto it = keywords_.find(t); it != keywords_.end()) {
                row[it->second] += 1.0;
                total += 1.0;
            }
        if (total == 0.0) {
            row[kNumEmotions - 1] = 1.0;
            return row;
        }
        for (auto& v : row) v /= total;
        return row;
    }

    EmotionRow score(const ReviewRecord& r) const { return score(text::tokenize(r.title + "\n" + r.body)); }

private:
    std::unordered_map<std::string, std::size_t> keywords_;
};

// ---------------------------------------------------------------------------
// emotions.tsv: review_id followed by the 28 categories in canonical order.

inline void save_emotions(const std::string& path, const std::vector<std::string>& ids,
                          const std::vector<EmotionRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write emotions: " + path);
    out << "review_id";
    for (auto c : kEmotionCategories) out << '\t' << c;
    out << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << tsv::escape(ids[i]);
        for (double v : rows[i]) out << '\t' << tsv::format_double(v);
        out << '\n';
    }
}

struct EmotionTable {
    std::vector<std::string> review_ids;
    std::vector<EmotionRow> rows;
};

inline EmotionTable load_emotions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open emotions: " + path);
    std::string line;
    if (!tsv::read_line(in, line)) throw ParseError("emotions: empty file", 1);
    auto header = tsv::split(line);
    if (header.size() != kNumEmotions + 1 || header[0] != "review_id")
        throw ParseError("emotions: header must be review_id plus 28 categories", 1);
    for (std::size_t c = 0; c < kNumEmotions; ++c)
        if (text::to_lower_ascii(header[c + 1]) != kEmotionCategories[c])
            throw ParseError("emotions: column " + std::to_string(c + 2) + " is '" + header[c + 1] + "', expected '" +
                                 std::string(kEmotionCategories[c]) + "'",
                             1);
    EmotionTable t;
    std::size_t lineno = 1;
    std::unordered_set<std::string> seen;
    while (tsv::read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = tsv::split(line);
        if (f.size() != kNumEmotions + 1) throw ParseError("emotions: expected 29 columns", lineno);
        EmotionRow row{};
        for (std::size_t c = 0; c < kNumEmotions; ++c) {
            row[c] = tsv::parse_double(f[c + 1], lineno, kEmotionCategories[c]);
            if (!std::isfinite(row[c])) throw ValidationError("emotions: non-finite value at line " + std::to_string(lineno));
            if (row[c] < 0.0 || row[c] > 1.0)
                throw ValidationError("emotions: probability outside [0,1] at line " + std::to_string(lineno));
        }
        auto id = tsv::unescape(f[0]);
        if (!seen.insert(id).second) throw IntegrityError("emotions: duplicate review_id " + id, {id});
        t.review_ids.push_back(std::move(id));
        t.rows.push_back(row);
    }
    return t;
}

// Rows reordered to `order`; every id must be present exactly once.
inline EmotionTable align_emotions(const EmotionTable& t, const std::vector<std::string>& order) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < t.review_ids.size(); ++i) index.emplace(t.review_ids[i], i);
    std::vector<std::string> missing;
    for (const auto& id : order)
        if (!index.contains(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = "emotion scores missing for:";
        for (const auto& id : missing) msg += " " + id;
        throw AlignmentError(msg, missing);
    }
    EmotionTable out;
    out.review_ids = order;
    for (const auto& id : order) out.rows.push_back(t.rows[index.at(id)]);
    return out;
}

// points.tsv: review_id, valence, activation.
inline void save_points(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<CircumplexPoint>& points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write points: " + path);
    out << "review_id\tvalence\tactivation\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << tsv::escape(ids[i]) << '\t' << tsv::format_double(points[i].valence) << '\t'
            << tsv::format_double(points[i].activation) << '\n';
}

inline std::pair<std::vector<std::string>, std::vector<CircumplexPoint>> load_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open points: " + path);
    std::pair<std::vector<std::string>, std::vector<CircumplexPoint>> out;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        if (++lineno == 1 || line.empty()) continue;
        auto f = tsv::split(line);
        if (f.size() != 3) throw ParseError("points: expected 3 columns", lineno);
        out.first.push_back(tsv::unescape(f[0]));
        out.second.push_back({tsv::parse_double(f[1], lineno, "valence"), tsv::parse_double(f[2], lineno, "activation")});
    }
    return out;
}

} // namespace emotopic
