#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cluster.hpp"
#include "diag.hpp"
#include "emotion.hpp"
#include "error.hpp"
#include "framework.hpp"
#include "tsv.hpp"

namespace emotopic {

namespace math {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student's t with df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    return std::clamp(incomplete_beta(df / 2.0, 0.5, df / (df + t * t)), 0.0, 1.0);
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lo + hi) / 2.0;
}

} // namespace math

struct SignificanceResult {
    std::size_t n = 0;
    double mean = 0.0;
    double t = 0.0;
    std::size_t df = 0;
    double p = 1.0;
    double p_corrected = 1.0;
    bool significant = false;
    bool degenerate = false;  // zero sample variance
};

// Two-sided one-sample t-test against mu0 with the sample (n-1) standard
// deviation. A zero-variance sample is degenerate: p = 0 if its mean differs
// from mu0, otherwise 1. p_corrected is initialized to p.
inline SignificanceResult one_sample_ttest(const std::vector<double>& values, double mu0 = 0.0) {
    if (values.size() < 2) throw ValidationError("t-test needs at least 2 values");
    SignificanceResult r;
    r.n = values.size();
    r.df = r.n - 1;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(r.n);
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double s = std::sqrt(ss / static_cast<double>(r.df));
    if (s == 0.0) {
        r.degenerate = true;
        const double diff = r.mean - mu0;
        r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.p = diff == 0.0 ? 1.0 : 0.0;
    } else {
        r.t = (r.mean - mu0) / (s / std::sqrt(static_cast<double>(r.n)));
        r.p = math::student_t_two_sided_p(r.t, static_cast<double>(r.df));
    }
    r.p_corrected = r.p;
    return r;
}

struct BonferroniResult {
    std::vector<double> corrected;
    std::vector<bool> significant;
};

// p_i -> min(1, m * p_i); significant iff the corrected value is below alpha.
inline BonferroniResult bonferroni(const std::vector<double>& pvals, double alpha) {
    BonferroniResult r;
    const double m = static_cast<double>(pvals.size());
    for (double p : pvals) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0,1]: " + tsv::format_double(p));
        const double c = std::min(1.0, m * p);
        r.corrected.push_back(c);
        r.significant.push_back(c < alpha);
    }
    return r;
}

inline void apply_bonferroni(std::vector<SignificanceResult*> results, double alpha) {
    std::vector<double> p;
    for (auto* r : results) p.push_back(r->p);
    auto b = bonferroni(p, alpha);
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i]->p_corrected = b.corrected[i];
        results[i]->significant = b.significant[i];
    }
}

// ---------------------------------------------------------------------------
// Topic statistics

struct TopicStats {
    int topic = 0;
    std::size_t n_reviews = 0;
    SignificanceResult valence;
    SignificanceResult activation;
    std::optional<MhealthDomain> domain;
};

using PointIndex = std::unordered_map<std::string, CircumplexPoint>;

inline PointIndex index_points(const std::vector<std::string>& ids, const std::vector<CircumplexPoint>& points) {
    PointIndex idx;
    for (std::size_t i = 0; i < ids.size(); ++i) idx[ids[i]] = points.at(i);
    return idx;
}

// Per topic, mean valence and activation tested against 0. Bonferroni is
// applied per dimension across the tested topics. Topics with fewer than two
// reviews are skipped with a warning. Output is ordered by topic id; use
// sort_by_valence for the ranked view.
inline std::vector<TopicStats> topic_stats(const PointIndex& points, const std::vector<TopicAssignment>& assignments,
                                           const DomainMapping* mapping, double alpha = 0.05) {
    std::map<int, std::vector<const CircumplexPoint*>> groups;
    std::vector<std::string> missing;
    for (const auto& a : assignments) {
        if (a.topic == kOutlier) continue;
        auto it = points.find(a.review_id);
        if (it == points.end()) {
            missing.push_back(a.review_id);
            continue;
        }
        groups[a.topic].push_back(&it->second);
    }
    if (!missing.empty()) throw AlignmentError("reviews without circumplex point", missing);

    std::vector<TopicStats> out;
    for (const auto& [topic, pts] : groups) {
        if (pts.size() < 2) {
            diag::warn("topic " + std::to_string(topic) + " has fewer than 2 reviews; excluded from testing");
            continue;
        }
        std::vector<double> v, a;
        for (const auto* p : pts) {
            v.push_back(p->valence);
            a.push_back(p->activation);
        }
        TopicStats ts;
        ts.topic = topic;
        ts.n_reviews = pts.size();
        ts.valence = one_sample_ttest(v, 0.0);
        ts.activation = one_sample_ttest(a, 0.0);
        if (mapping)
            if (auto it = mapping->entries.find(topic); it != mapping->entries.end()) ts.domain = it->second.domain;
        out.push_back(ts);
    }
    std::vector<SignificanceResult*> val, act;
    for (auto& ts : out) {
        val.push_back(&ts.valence);
        act.push_back(&ts.activation);
    }
    apply_bonferroni(val, alpha);
    apply_bonferroni(act, alpha);
    return out;
}

inline void sort_by_valence(std::vector<TopicStats>& stats) {
    std::stable_sort(stats.begin(), stats.end(),
                     [](const TopicStats& a, const TopicStats& b) { return a.valence.mean < b.valence.mean; });
}

// Pools every review of each domain into one valence test; Bonferroni across
// the domains tested. Domains with fewer than two reviews are omitted.
inline std::map<MhealthDomain, SignificanceResult> domain_valence(const DomainRollup& rollup, const PointIndex& points,
                                                                  double alpha = 0.05) {
    std::map<MhealthDomain, SignificanceResult> out;
    for (const auto& [domain, ids] : rollup.reviews) {
        if (ids.size() < 2) continue;
        std::vector<double> v;
        for (const auto& id : ids) {
            auto it = points.find(id);
            if (it == points.end()) throw AlignmentError("review without circumplex point: " + id, {id});
            v.push_back(it->second.valence);
        }
        out[domain] = one_sample_ttest(v, 0.0);
    }
    std::vector<SignificanceResult*> ptrs;
    for (auto& [_, r] : out) ptrs.push_back(&r);
    apply_bonferroni(ptrs, alpha);
    return out;
}

// ---------------------------------------------------------------------------
// Neutral band

struct NeutralBand {
    double lo = -1.0, hi = 1.0;
    std::size_t n_below = 0, n_above = 0, n_within = 0;
    std::size_t n_negative = 0, n_positive = 0, n_zero = 0;
    double median = 0.0;
};

// Strict comparisons: below means < lo, above means > hi.
inline NeutralBand neutral_band_analysis(const std::vector<double>& activations, double lo = -1.0, double hi = 1.0) {
    if (!(lo < hi)) throw ConfigError("neutral band requires lo < hi");
    NeutralBand b;
    b.lo = lo;
    b.hi = hi;
    for (double a : activations) {
        if (a < lo) ++b.n_below;
        else if (a > hi) ++b.n_above;
        else ++b.n_within;
        if (a < 0) ++b.n_negative;
        else if (a > 0) ++b.n_positive;
        else ++b.n_zero;
    }
    b.median = math::median(activations);
    return b;
}

// ---------------------------------------------------------------------------
// Hypotheses

enum class Verdict { supported, rejected, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::supported: return "supported";
    case Verdict::rejected: return "rejected";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct HypothesisResult {
    Verdict verdict = Verdict::inconclusive;
    nlohmann::ordered_json evidence;
};

struct HypothesisReport {
    HypothesisResult h1a, h1b, h2;
};

struct HypothesisInputs {
    std::map<MhealthDomain, std::size_t> domain_counts;
    std::map<MhealthDomain, SignificanceResult> domain_valence;
    std::vector<TopicStats> topics;
    NeutralBand reviews;  // review-level activation
};

inline nlohmann::ordered_json to_json(const SignificanceResult& r) {
    return {{"n", r.n},   {"mean", r.mean},        {"t", r.t},   {"df", r.df},
            {"p", r.p},   {"p_corrected", r.p_corrected}, {"significant", r.significant}};
}

// H1a: the content-validity domain draws more reviews than technical support.
// H1b: content validity has the lower mean valence, both means significant.
// H2:  the topic level decides. Supported needs strictly more significantly
//      active than passive topics and more reviews above the neutral band than
//      below it; topic-level support contradicted at review level is
//      inconclusive; otherwise rejected.
inline HypothesisReport evaluate_hypotheses(const HypothesisInputs& in) {
    const auto cv = MhealthDomain::content_validity;
    const auto tf = MhealthDomain::technical_support;
    for (auto d : {cv, tf}) {
        if (!in.domain_counts.contains(d))
            throw ValidationError("hypotheses: domain '" + std::string(domain_name(d)) + "' missing from rollup");
        if (!in.domain_valence.contains(d))
            throw ValidationError("hypotheses: no valence test for domain '" + std::string(domain_name(d)) + "'");
    }
    HypothesisReport rep;

    const auto n_cv = in.domain_counts.at(cv), n_tf = in.domain_counts.at(tf);
    rep.h1a.verdict = n_cv > n_tf ? Verdict::supported : Verdict::rejected;
    rep.h1a.evidence = {{"count_content_validity", n_cv}, {"count_technical_support", n_tf}};

    const auto& v_cv = in.domain_valence.at(cv);
    const auto& v_tf = in.domain_valence.at(tf);
    const bool both_sig = v_cv.significant && v_tf.significant;
    rep.h1b.verdict = (v_cv.mean < v_tf.mean && both_sig) ? Verdict::supported : Verdict::rejected;
    rep.h1b.evidence = {{"valence_content_validity", to_json(v_cv)}, {"valence_technical_support", to_json(v_tf)}};

    std::size_t active = 0, passive = 0;
    nlohmann::ordered_json sig_topics = nlohmann::ordered_json::array();
    for (const auto& t : in.topics) {
        if (!t.activation.significant) continue;
        (t.activation.mean > 0 ? active : passive) += 1;
        sig_topics.push_back({{"topic", t.topic}, {"mean_activation", t.activation.mean},
                              {"p_corrected", t.activation.p_corrected}});
    }
    const bool topic_support = active > passive;
    const bool review_support = in.reviews.n_above > in.reviews.n_below;
    rep.h2.verdict = topic_support ? (review_support ? Verdict::supported : Verdict::inconclusive) : Verdict::rejected;
    rep.h2.evidence = {{"significant_active_topics", active},
                       {"significant_passive_topics", passive},
                       {"topics", sig_topics},
                       {"reviews_above_band", in.reviews.n_above},
                       {"reviews_below_band", in.reviews.n_below},
                       {"reviews_within_band", in.reviews.n_within},
                       {"reviews_negative", in.reviews.n_negative},
                       {"reviews_positive", in.reviews.n_positive},
                       {"median_activation", in.reviews.median},
                       {"band", {in.reviews.lo, in.reviews.hi}},
                       {"topic_level_support", topic_support},
                       {"review_level_support", review_support}};
    return rep;
}

inline nlohmann::ordered_json to_json(const HypothesisReport& r) {
    auto one = [](const HypothesisResult& h) {
        return nlohmann::ordered_json{{"verdict", to_string(h.verdict)}, {"evidence", h.evidence}};
    };
    return {{"H1a", one(r.h1a)}, {"H1b", one(r.h1b)}, {"H2", one(r.h2)}};
}

// stats.tsv: topic, domain, n, mean_valence, p_v, p_v_corrected,
// mean_activation, p_a, p_a_corrected.
inline void save_topic_stats(const std::string& path, const std::vector<TopicStats>& stats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write stats: " + path);
    out << "topic\tdomain\tn\tmean_valence\tp_v\tp_v_corrected\tmean_activation\tp_a\tp_a_corrected\n";
    for (const auto& s : stats)
        out << s.topic << '\t' << (s.domain ? domain_id(*s.domain) : "-") << '\t' << s.n_reviews << '\t'
            << tsv::format_double(s.valence.mean) << '\t' << tsv::format_double(s.valence.p) << '\t'
            << tsv::format_double(s.valence.p_corrected) << '\t' << tsv::format_double(s.activation.mean) << '\t'
            << tsv::format_double(s.activation.p) << '\t' << tsv::format_double(s.activation.p_corrected) << '\n';
}

} // namespace emotopic
