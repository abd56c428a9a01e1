#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "tsv.hpp"

namespace emotopic {

// Class-based TF-IDF. Each topic's documents are concatenated into one class
// document; term t in class c is weighted
//
//     W[t,c] = tf[t,c] * ln(1 + A / tf[t])
//
// where tf[t] is the count of t over all classes and A is the average number
// of tokens per class. Outlier documents (topic -1) are not part of any class.
struct CtfidfModel {
    std::vector<int> classes;             // ascending topic ids
    std::vector<std::string> vocabulary;  // ascending
    std::vector<double> tf_class;         // |vocabulary| x |classes|, row-major by term
    std::vector<double> tf_total;         // |vocabulary|
    std::vector<double> weights;          // same shape as tf_class
    double avg_class_tokens = 0.0;        // A

    std::size_t num_classes() const noexcept { return classes.size(); }
    std::size_t num_terms() const noexcept { return vocabulary.size(); }
    double tf(std::size_t t, std::size_t c) const { return tf_class[t * classes.size() + c]; }
    double weight(std::size_t t, std::size_t c) const { return weights[t * classes.size() + c]; }

    std::size_t class_index(int topic) const {
        auto it = std::lower_bound(classes.begin(), classes.end(), topic);
        if (it == classes.end() || *it != topic) throw ConfigError("unknown topic " + std::to_string(topic));
        return static_cast<std::size_t>(it - classes.begin());
    }

    std::ptrdiff_t term_index(const std::string& term) const {
        auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
        return (it == vocabulary.end() || *it != term) ? -1 : it - vocabulary.begin();
    }

    double weight(const std::string& term, int topic) const {
        auto t = term_index(term);
        return t < 0 ? 0.0 : weight(static_cast<std::size_t>(t), class_index(topic));
    }

    // Recomputes A and W from tf_class and tf_total.
    void recompute_weights() {
        const std::size_t C = classes.size();
        double total = 0.0;
        for (double v : tf_class) total += v;
        avg_class_tokens = C ? total / static_cast<double>(C) : 0.0;
        weights.assign(tf_class.size(), 0.0);
        for (std::size_t t = 0; t < vocabulary.size(); ++t) {
            if (tf_total[t] <= 0) continue;
            const double idf = std::log(1.0 + avg_class_tokens / tf_total[t]);
            for (std::size_t c = 0; c < C; ++c) weights[t * C + c] = tf_class[t * C + c] * idf;
        }
    }
};

// Topic lookup keyed by review id; every document must be covered.
inline std::unordered_map<std::string, int> topic_index(const std::vector<TokenizedDoc>& docs,
                                                        const std::vector<TopicAssignment>& assignments) {
    std::unordered_map<std::string, int> topic_of;
    for (const auto& a : assignments) topic_of[a.review_id] = a.topic;
    std::vector<std::string> missing;
    for (const auto& d : docs)
        if (!topic_of.contains(d.review_id)) missing.push_back(d.review_id);
    if (!missing.empty()) throw AlignmentError("documents without topic assignment", missing);
    return topic_of;
}

inline CtfidfModel ctfidf(const std::vector<TokenizedDoc>& docs, const std::vector<TopicAssignment>& assignments) {
    const auto topic_of = topic_index(docs, assignments);
    std::set<int> class_set;
    std::set<std::string> vocab_set;
    for (const auto& d : docs) {
        const int t = topic_of.at(d.review_id);
        if (t == kOutlier) continue;
        class_set.insert(t);
        vocab_set.insert(d.model_tokens.begin(), d.model_tokens.end());
    }
    if (class_set.empty()) throw EmptyModelError("c-TF-IDF: every document is an outlier");

    CtfidfModel m;
    m.classes.assign(class_set.begin(), class_set.end());
    m.vocabulary.assign(vocab_set.begin(), vocab_set.end());
    const std::size_t C = m.classes.size();
    m.tf_class.assign(m.vocabulary.size() * C, 0.0);
    m.tf_total.assign(m.vocabulary.size(), 0.0);
    for (const auto& d : docs) {
        const int topic = topic_of.at(d.review_id);
        if (topic == kOutlier) continue;
        const std::size_t c = m.class_index(topic);
        for (const auto& tok : d.model_tokens) {
            const auto t = static_cast<std::size_t>(m.term_index(tok));
            m.tf_class[t * C + c] += 1.0;
            m.tf_total[t] += 1.0;
        }
    }
    m.recompute_weights();
    return m;
}

struct WeightedTerm {
    std::string term;
    double weight = 0.0;
};

// Up to k terms with non-zero weight, by descending weight, ties lexicographic.
inline std::vector<WeightedTerm> top_terms_weighted(const CtfidfModel& m, int topic, std::size_t k) {
    const std::size_t c = m.class_index(topic);
    std::vector<WeightedTerm> terms;
    for (std::size_t t = 0; t < m.num_terms(); ++t)
        if (m.weight(t, c) > 0) terms.push_back({m.vocabulary[t], m.weight(t, c)});
    auto cmp = [](const WeightedTerm& a, const WeightedTerm& b) {
        return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
    };
    if (terms.size() > k) {
        std::partial_sort(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(k), terms.end(), cmp);
        terms.resize(k);
    } else {
        std::sort(terms.begin(), terms.end(), cmp);
    }
    return terms;
}

inline std::vector<std::string> top_terms(const CtfidfModel& m, int topic, std::size_t k) {
    std::vector<std::string> out;
    for (auto& wt : top_terms_weighted(m, topic, k)) out.push_back(std::move(wt.term));
    return out;
}

// ---------------------------------------------------------------------------
// Topic reduction

// Greedy agglomeration of c-TF-IDF classes. Each step merges the pair with
// the highest cosine similarity between weight columns (ties: lowest pair in
// class order), folds the later class into the earlier one and recomputes
// the weights. Class ids are compacted to 0..k-1 by `result()`.
class TopicReducer {
public:
    TopicReducer(CtfidfModel model, std::vector<TopicAssignment> assignments)
        : model_(std::move(model)), assignments_(std::move(assignments)) {
        for (int c : model_.classes) parent_[c] = c;
    }

    std::size_t num_classes() const noexcept { return model_.num_classes(); }

    // Performs one merge; returns the merged (kept, absorbed) topic ids.
    std::pair<int, int> merge_once() {
        const std::size_t C = model_.num_classes();
        if (C < 2) throw ConfigError("cannot merge fewer than two classes");
        std::vector<double> norm(C, 0.0);
        for (std::size_t t = 0; t < model_.num_terms(); ++t)
            for (std::size_t c = 0; c < C; ++c) norm[c] += model_.weight(t, c) * model_.weight(t, c);
        for (auto& v : norm) v = std::sqrt(v);

        std::vector<double> dot(C * C, 0.0);
        for (std::size_t t = 0; t < model_.num_terms(); ++t) {
            const double* w = model_.weights.data() + t * C;
            for (std::size_t a = 0; a < C; ++a) {
                if (w[a] == 0.0) continue;
                for (std::size_t b = a + 1; b < C; ++b) dot[a * C + b] += w[a] * w[b];
            }
        }
        std::size_t best_a = 0, best_b = 1;
        double best = -1.0;
        for (std::size_t a = 0; a < C; ++a)
            for (std::size_t b = a + 1; b < C; ++b) {
                const double denom = norm[a] * norm[b];
                const double cos = denom > 0 ? dot[a * C + b] / denom : 0.0;
                if (cos > best) {
                    best = cos;
                    best_a = a;
                    best_b = b;
                }
            }
        return merge(best_a, best_b);
    }

    void reduce_to(std::size_t target) {
        if (target < 1 || target > num_classes())
            throw ConfigError("reduce target must be in [1, " + std::to_string(num_classes()) + "]");
        while (num_classes() > target) merge_once();
    }

    const CtfidfModel& model() const noexcept { return model_; }

    // Model and assignments with classes renumbered 0..k-1 in ascending order
    // of their surviving id.
    std::pair<CtfidfModel, std::vector<TopicAssignment>> result() const {
        std::map<int, int> compact;
        for (std::size_t i = 0; i < model_.classes.size(); ++i) compact[model_.classes[i]] = static_cast<int>(i);
        CtfidfModel m = model_;
        for (auto& c : m.classes) c = compact.at(c);
        std::vector<TopicAssignment> a = assignments_;
        for (auto& x : a)
            if (x.topic != kOutlier) x.topic = compact.at(root(x.topic));
        return {std::move(m), std::move(a)};
    }

private:
    int root(int c) const {
        while (parent_.at(c) != c) c = parent_.at(c);
        return c;
    }

    std::pair<int, int> merge(std::size_t a, std::size_t b) {
        const std::size_t C = model_.num_classes();
        const int keep = model_.classes[a];
        const int gone = model_.classes[b];
        std::vector<double> tf;
        tf.reserve(model_.num_terms() * (C - 1));
        for (std::size_t t = 0; t < model_.num_terms(); ++t)
            for (std::size_t c = 0; c < C; ++c) {
                if (c == b) continue;
                double v = model_.tf(t, c);
                if (c == a) v += model_.tf(t, b);
                tf.push_back(v);
            }
        model_.tf_class = std::move(tf);
        model_.classes.erase(model_.classes.begin() + static_cast<std::ptrdiff_t>(b));
        model_.recompute_weights();
        parent_[gone] = keep;
        return {keep, gone};
    }

    CtfidfModel model_;
    std::vector<TopicAssignment> assignments_;
    std::map<int, int> parent_;
};

inline std::pair<CtfidfModel, std::vector<TopicAssignment>> reduce_topics(const CtfidfModel& model,
                                                                          const std::vector<TopicAssignment>& assignments,
                                                                          std::size_t target) {
    TopicReducer r(model, assignments);
    r.reduce_to(target);
    return r.result();
}

// ---------------------------------------------------------------------------
// Persistence

// top-terms TSV: topic, rank (1-based), term, weight.
inline void save_top_terms(const std::string& path, const CtfidfModel& m, std::size_t k) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write top terms: " + path);
    out << "topic\trank\tterm\tweight\n";
    for (int topic : m.classes) {
        std::size_t rank = 0;
        for (const auto& wt : top_terms_weighted(m, topic, k))
            out << topic << '\t' << ++rank << '\t' << wt.term << '\t' << tsv::format_double(wt.weight) << '\n';
    }
}

inline std::map<int, std::vector<WeightedTerm>> load_top_terms(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open top terms: " + path);
    std::map<int, std::vector<WeightedTerm>> out;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        if (++lineno == 1 || line.empty()) continue;
        auto f = tsv::split(line);
        if (f.size() != 4) throw ParseError("top terms: expected 4 columns", lineno);
        out[static_cast<int>(tsv::parse_int(f[0], lineno, "topic"))].push_back(
            {f[2], tsv::parse_double(f[3], lineno, "weight")});
    }
    return out;
}

} // namespace emotopic
