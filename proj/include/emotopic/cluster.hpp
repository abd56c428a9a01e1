#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "embeddings.hpp"
#include "error.hpp"
#include "tsv.hpp"

namespace emotopic {

inline constexpr int kOutlier = -1;

struct TopicAssignment {
    std::string review_id;
    int topic = kOutlier;

    friend bool operator==(const TopicAssignment&, const TopicAssignment&) = default;
};

struct DbscanParams {
    double eps = 0.5;
    std::size_t min_pts = 5;  // neighbourhood size including the point itself
};

// DBSCAN over Euclidean distance. Points are visited in input order and
// clusters are numbered in order of discovery, so the output is deterministic
// for a given row order. Rows flagged as empty documents are always noise.
inline std::vector<TopicAssignment> cluster(const EmbeddingMatrix& m, const DbscanParams& params) {
    if (params.min_pts < 1) throw ConfigError("min_pts must be >= 1");
    if (!(params.eps > 0)) throw ConfigError("eps must be > 0");
    const std::size_t n = m.rows();
    const double eps2 = params.eps * params.eps;
    auto is_flagged = [&](std::size_t i) { return i < m.flagged.size() && m.flagged[i]; };

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_flagged(i)) continue;
        for (std::size_t j = i; j < n; ++j) {
            if (is_flagged(j)) continue;
            double d2 = 0.0;
            const double* a = m.row(i);
            const double* b = m.row(j);
            for (std::size_t k = 0; k < m.dim && d2 <= eps2; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
            if (d2 <= eps2) {
                neighbours[i].push_back(j);
                if (j != i) neighbours[j].push_back(i);
            }
        }
    }
    for (auto& nb : neighbours) std::sort(nb.begin(), nb.end());

    constexpr int kUnvisited = -2;
    std::vector<int> label(n, kUnvisited);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (is_flagged(i) || neighbours[i].size() < params.min_pts) {
            label[i] = kOutlier;
            continue;
        }
        const int c = next++;
        label[i] = c;
        std::deque<std::size_t> frontier(neighbours[i].begin(), neighbours[i].end());
        while (!frontier.empty()) {
            const std::size_t q = frontier.front();
            frontier.pop_front();
            if (label[q] == kOutlier) label[q] = c;  // border point
            if (label[q] != kUnvisited) continue;
            label[q] = c;
            if (neighbours[q].size() >= params.min_pts)
                frontier.insert(frontier.end(), neighbours[q].begin(), neighbours[q].end());
        }
    }

    std::vector<TopicAssignment> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {m.review_ids[i], label[i]};
    return out;
}

inline void save_assignments(const std::string& path, const std::vector<TopicAssignment>& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write assignments: " + path);
    out << "review_id\ttopic\n";
    for (const auto& x : a) out << tsv::escape(x.review_id) << '\t' << x.topic << '\n';
}

// Also accepts externally computed (e.g. hierarchical density) clusterings.
inline std::vector<TopicAssignment> load_assignments(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open assignments: " + path);
    std::vector<TopicAssignment> out;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        if (++lineno == 1 || line.empty()) continue;
        auto f = tsv::split(line);
        if (f.size() != 2) throw ParseError("assignments: expected review_id, topic", lineno);
        auto t = tsv::parse_int(f[1], lineno, "topic");
        if (t < kOutlier) throw ParseError("assignments: topic must be >= -1", lineno);
        out.push_back({tsv::unescape(f[0]), static_cast<int>(t)});
    }
    return out;
}

} // namespace emotopic
