#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctfidf.hpp"
#include "diag.hpp"
#include "error.hpp"

namespace emotopic {

struct PairAudit {
    int topic = 0;
    std::string x, y;
    double p_x = 0, p_y = 0, p_xy = 0;
    double npmi = 0;
};

struct CoherenceStats {
    double npmi = 0.0;       // mean over topics
    double diversity = 0.0;  // fraction of unique top terms
    std::size_t topic_count = 0;
    std::map<int, double> per_topic;
    std::vector<PairAudit> pairs;
};

inline constexpr double kNpmiEpsilon = 1e-12;

// Documents that belong to some topic; outliers are excluded from
// coherence reference counts.
inline std::vector<TokenizedDoc> modeled_docs(const std::vector<TokenizedDoc>& docs,
                                              const std::vector<TopicAssignment>& assignments) {
    const auto topic_of = topic_index(docs, assignments);
    std::vector<TokenizedDoc> out;
    for (const auto& d : docs)
        if (topic_of.at(d.review_id) != kOutlier) out.push_back(d);
    return out;
}

// NPMI for one pair from document counts. p(x,y) is smoothed as
// (n_xy + eps) / (n + eps). A pair involving a term absent from every
// reference document scores -1. The result is clamped to [-1, 1].
inline double npmi_from_counts(std::size_t n_x, std::size_t n_y, std::size_t n_xy, std::size_t n_docs, double eps,
                               PairAudit* audit = nullptr) {
    const double n = static_cast<double>(n_docs);
    const double px = static_cast<double>(n_x) / n;
    const double py = static_cast<double>(n_y) / n;
    const double pxy = (static_cast<double>(n_xy) + eps) / (n + eps);
    if (audit) {
        audit->p_x = px;
        audit->p_y = py;
        audit->p_xy = pxy;
    }
    double v;
    if (n_x == 0 || n_y == 0)
        v = -1.0;
    else if (pxy >= 1.0)
        v = 1.0;
    else
        v = std::log(pxy / (px * py)) / -std::log(pxy);
    return std::clamp(v, -1.0, 1.0);
}

inline double topic_diversity(const CtfidfModel& model, std::size_t top_n) {
    if (top_n < 1) throw ConfigError("top_n must be >= 1");
    if (model.num_classes() == 0) return 0.0;
    std::set<std::string> unique;
    for (int topic : model.classes)
        for (auto& t : top_terms(model, topic, top_n)) unique.insert(std::move(t));
    return static_cast<double>(unique.size()) / static_cast<double>(model.num_classes() * top_n);
}

// Mean NPMI over topics; each topic scores the mean over unordered pairs of
// its top_n terms, using boolean document co-occurrence in `reference`.
inline CoherenceStats npmi_coherence(const CtfidfModel& model, const std::vector<TokenizedDoc>& reference,
                                     std::size_t top_n, double epsilon = kNpmiEpsilon) {
    if (top_n < 2) throw ConfigError("top_n must be >= 2 for coherence");
    CoherenceStats stats;
    stats.topic_count = model.num_classes();
    stats.diversity = topic_diversity(model, top_n);
    if (reference.empty()) {
        diag::warn("coherence: empty reference corpus");
        return stats;
    }

    std::map<int, std::vector<std::string>> tops;
    std::unordered_map<std::string, std::vector<std::size_t>> postings;
    for (int topic : model.classes) {
        tops[topic] = top_terms(model, topic, top_n);
        for (const auto& t : tops[topic]) postings.try_emplace(t);
    }
    for (std::size_t d = 0; d < reference.size(); ++d) {
        std::set<std::string_view> seen(reference[d].model_tokens.begin(), reference[d].model_tokens.end());
        for (auto w : seen)
            if (auto it = postings.find(std::string(w)); it != postings.end()) it->second.push_back(d);
    }

    std::size_t absent = 0;
    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& [topic, terms] : tops) {
        if (terms.size() < 2) {
            diag::warn("coherence: topic " + std::to_string(topic) + " has fewer than 2 weighted terms; skipped");
            continue;
        }
        double topic_sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < terms.size(); ++i)
            for (std::size_t j = i + 1; j < terms.size(); ++j) {
                const auto& px = postings.at(terms[i]);
                const auto& py = postings.at(terms[j]);
                std::size_t both = 0;
                for (std::size_t a = 0, b = 0; a < px.size() && b < py.size();) {
                    if (px[a] < py[b]) ++a;
                    else if (py[b] < px[a]) ++b;
                    else { ++both; ++a; ++b; }
                }
                PairAudit audit{topic, terms[i], terms[j]};
                audit.npmi = npmi_from_counts(px.size(), py.size(), both, reference.size(), epsilon, &audit);
                absent += px.empty() || py.empty();
                topic_sum += audit.npmi;
                ++pairs;
                stats.pairs.push_back(std::move(audit));
            }
        stats.per_topic[topic] = topic_sum / static_cast<double>(pairs);
        sum += stats.per_topic[topic];
        ++scored;
    }
    if (absent) diag::warn("coherence: " + std::to_string(absent) + " pair(s) involve terms absent from the reference documents");
    stats.npmi = scored ? sum / static_cast<double>(scored) : 0.0;
    return stats;
}

// ---------------------------------------------------------------------------
// Topic-count selection

struct CurvePoint {
    std::size_t topic_count = 0;
    double npmi = 0.0;
    double diversity = 0.0;
};

struct TopicCountChoice {
    std::size_t count = 0;
    bool diversity_fallback = false;  // no candidate met diversity_min
    bool out_of_range = false;        // no candidate in [lo, hi]
};

// Highest NPMI among candidates in [lo, hi] with diversity >= diversity_min;
// ties go to the smaller count. Without a diverse-enough candidate the
// diversity constraint is dropped and a warning issued.
inline TopicCountChoice choose_topic_count(const std::vector<CurvePoint>& curve, std::size_t lo, std::size_t hi,
                                           double diversity_min) {
    TopicCountChoice choice;
    auto pick = [&](bool need_diversity) -> const CurvePoint* {
        const CurvePoint* best = nullptr;
        for (const auto& p : curve) {
            if (p.topic_count < lo || p.topic_count > hi) continue;
            if (need_diversity && p.diversity < diversity_min) continue;
            if (!best || p.npmi > best->npmi || (p.npmi == best->npmi && p.topic_count < best->topic_count)) best = &p;
        }
        return best;
    };
    if (const auto* p = pick(true)) {
        choice.count = p->topic_count;
        return choice;
    }
    if (const auto* p = pick(false)) {
        diag::warn("no topic count reaches diversity " + tsv::format_double(diversity_min) +
                   "; choosing by coherence alone");
        choice.count = p->topic_count;
        choice.diversity_fallback = true;
        return choice;
    }
    choice.out_of_range = true;
    return choice;
}

struct TopicSelection {
    std::size_t count = 0;
    std::vector<CurvePoint> curve;  // descending topic count
    bool diversity_fallback = false;
};

struct SelectionParams {
    std::size_t lo = 10;
    std::size_t hi = 50;
    double diversity_min = 0.7;
    std::size_t top_n = 10;
    double epsilon = kNpmiEpsilon;
};

// Walks the greedy merge sequence downward from min(hi, initial count) to lo,
// scoring every count. Merges are nested, so successive reductions of one
// reducer give the same models as independent reduce_topics calls.
inline TopicSelection select_topic_count(const CtfidfModel& model, const std::vector<TokenizedDoc>& docs,
                                         const std::vector<TopicAssignment>& assignments,
                                         const SelectionParams& params) {
    if (params.lo < 2) throw ConfigError("topic range lower bound must be >= 2");
    if (params.hi < params.lo) throw ConfigError("topic range upper bound must be >= lower bound");
    TopicSelection sel;
    const auto reference = modeled_docs(docs, assignments);
    const std::size_t initial = model.num_classes();
    if (initial < params.lo) {
        diag::warn("initial topic count " + std::to_string(initial) + " is below the range lower bound " +
                   std::to_string(params.lo) + "; keeping it");
        auto c = npmi_coherence(model, reference, params.top_n, params.epsilon);
        sel.curve.push_back({initial, c.npmi, c.diversity});
        sel.count = initial;
        return sel;
    }

    TopicReducer reducer(model, assignments);
    reducer.reduce_to(std::min(params.hi, initial));
    while (true) {
        auto c = npmi_coherence(reducer.model(), reference, params.top_n, params.epsilon);
        sel.curve.push_back({reducer.num_classes(), c.npmi, c.diversity});
        if (reducer.num_classes() <= params.lo) break;
        reducer.merge_once();
    }
    auto choice = choose_topic_count(sel.curve, params.lo, params.hi, params.diversity_min);
    sel.count = choice.count;
    sel.diversity_fallback = choice.diversity_fallback;
    return sel;
}

} // namespace emotopic
