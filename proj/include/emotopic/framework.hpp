#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cluster.hpp"
#include "embeddings.hpp"
#include "error.hpp"
#include "text.hpp"
#include "tsv.hpp"

namespace emotopic {

// The ten assessment domains of the mHealth app evaluation framework.
enum class MhealthDomain {
    clarity_of_purpose = 1,
    developer_credibility,
    content_validity,
    user_experience,
    engagement_social_support,
    interoperability,
    value,
    technical_support,
    privacy_ethics_legal,
    accessibility,
};

inline constexpr std::size_t kNumDomains = 10;

struct DomainInfo {
    MhealthDomain domain;
    std::string_view id;
    std::string_view name;
};

inline constexpr std::array<DomainInfo, kNumDomains> kDomains = {{
    {MhealthDomain::clarity_of_purpose, "clarity_of_purpose", "Clarity of purpose"},
    {MhealthDomain::developer_credibility, "developer_credibility", "Developer credibility"},
    {MhealthDomain::content_validity, "content_validity", "Content/information validity"},
    {MhealthDomain::user_experience, "user_experience", "User experience"},
    {MhealthDomain::engagement_social_support, "engagement_social_support",
     "User-engagement/adherence and social support"},
    {MhealthDomain::interoperability, "interoperability", "Interoperability"},
    {MhealthDomain::value, "value", "Value"},
    {MhealthDomain::technical_support, "technical_support", "Technical features and support"},
    {MhealthDomain::privacy_ethics_legal, "privacy_ethics_legal", "Privacy/ethics/legal"},
    {MhealthDomain::accessibility, "accessibility", "Accessibility"},
}};

inline const DomainInfo& domain_info(MhealthDomain d) { return kDomains.at(static_cast<std::size_t>(d) - 1); }
inline std::string_view domain_id(MhealthDomain d) { return domain_info(d).id; }
inline std::string_view domain_name(MhealthDomain d) { return domain_info(d).name; }

// Accepts the id ("technical_support"), the 1-based number or the display name.
inline std::optional<MhealthDomain> parse_domain(std::string_view s) {
    const auto lower = text::to_lower_ascii(s);
    for (const auto& d : kDomains)
        if (lower == d.id || lower == text::to_lower_ascii(d.name)) return d.domain;
    if (!lower.empty() && lower.size() <= 2 && std::all_of(lower.begin(), lower.end(), ::isdigit)) {
        int n = std::stoi(lower);
        if (n >= 1 && n <= static_cast<int>(kNumDomains)) return static_cast<MhealthDomain>(n);
    }
    return std::nullopt;
}

struct MappingEntry {
    MhealthDomain domain{};
    std::string theme;
    std::string annotator;

    friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

// topic -> domain for one annotator (or the adjudicated result).
struct DomainMapping {
    std::map<int, MappingEntry> entries;
    std::optional<int> resume_from;  // set on partial files

    bool covers(const std::vector<int>& topics) const {
        return std::all_of(topics.begin(), topics.end(), [&](int t) { return entries.contains(t); });
    }

    friend bool operator==(const DomainMapping&, const DomainMapping&) = default;
};

inline void write_mapping(std::ostream& out, const DomainMapping& m) {
    out << "topic_id\tdomain_id\ttheme\tannotator\n";
    for (const auto& [topic, e] : m.entries)
        out << topic << '\t' << domain_id(e.domain) << '\t' << tsv::escape(e.theme) << '\t' << tsv::escape(e.annotator)
            << '\n';
    if (m.resume_from) out << "#resume\t" << *m.resume_from << '\n';
}

inline void save_mapping(const std::string& path, const DomainMapping& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write mapping: " + path);
    write_mapping(out, m);
}

inline DomainMapping read_mapping(std::istream& in) {
    DomainMapping m;
    std::string line;
    std::size_t lineno = 0;
    while (tsv::read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = tsv::split(line);
        if (f[0] == "#resume") {
            if (f.size() != 2) throw ParseError("mapping: malformed resume marker", lineno);
            m.resume_from = static_cast<int>(tsv::parse_int(f[1], lineno, "resume"));
            continue;
        }
        if (line[0] == '#' || (lineno == 1 && f[0] == "topic_id")) continue;
        if (f.size() != 4) throw ParseError("mapping: expected topic_id, domain_id, theme, annotator", lineno);
        const int topic = static_cast<int>(tsv::parse_int(f[0], lineno, "topic_id"));
        auto d = parse_domain(f[1]);
        if (!d) throw ParseError("mapping: unknown domain '" + f[1] + "'", lineno);
        if (m.entries.contains(topic))
            throw IntegrityError("mapping: topic " + std::to_string(topic) + " mapped twice", {std::to_string(topic)});
        m.entries[topic] = {*d, tsv::unescape(f[2]), tsv::unescape(f[3])};
    }
    return m;
}

inline DomainMapping load_mapping(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open mapping: " + path);
    return read_mapping(in);
}

// ---------------------------------------------------------------------------
// Annotation session

struct TopicPresentation {
    int topic = 0;
    std::vector<std::string> top_terms;
    std::vector<std::string> samples;
};

// The k reviews closest (Euclidean) to the topic centroid; `m` rows must be
// in the same order as `assignments`.
inline std::vector<std::string> nearest_to_centroid(const EmbeddingMatrix& m,
                                                    const std::vector<TopicAssignment>& assignments, int topic,
                                                    std::size_t k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < assignments.size() && i < m.rows(); ++i)
        if (assignments[i].topic == topic) members.push_back(i);
    if (members.empty()) return {};
    std::vector<double> centroid(m.dim, 0.0);
    for (auto i : members)
        for (std::size_t j = 0; j < m.dim; ++j) centroid[j] += m.at(i, j);
    for (auto& v : centroid) v /= static_cast<double>(members.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (auto i : members) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < m.dim; ++j) d2 += (m.at(i, j) - centroid[j]) * (m.at(i, j) - centroid[j]);
        dist.emplace_back(d2, i);
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::string> out;
    for (std::size_t r = 0; r < dist.size() && r < k; ++r) out.push_back(m.review_ids[dist[r].second]);
    return out;
}

struct SessionResult {
    DomainMapping mapping;
    bool complete = false;
};

// Walks the topics not yet in `existing`, showing the top terms and sample
// reviews and reading a domain (number or id) and a theme for each. "q" or
// end of input stops the session; the returned mapping then carries a resume
// marker at the first unanswered topic. If `existing` already covers every
// topic it is returned unchanged.
inline SessionResult mapping_session(const std::vector<TopicPresentation>& topics, const std::string& annotator,
                                     DomainMapping existing, std::istream& in, std::ostream& out) {
    std::vector<int> ids;
    for (const auto& t : topics) ids.push_back(t.topic);
    if (existing.covers(ids)) {
        existing.resume_from.reset();
        return {std::move(existing), true};
    }

    DomainMapping m = std::move(existing);
    m.resume_from.reset();
    for (const auto& t : topics) {
        if (m.entries.contains(t.topic)) continue;
        out << "\nTopic " << t.topic << "\n  terms:";
        for (const auto& term : t.top_terms) out << ' ' << term;
        out << '\n';
        for (const auto& s : t.samples) out << "  > " << s << '\n';
        for (const auto& d : kDomains) out << "  [" << static_cast<int>(d.domain) << "] " << d.name << '\n';

        std::optional<MhealthDomain> domain;
        std::string line;
        while (!domain) {
            out << "domain (1-10, q to stop): " << std::flush;
            if (!std::getline(in, line) || line == "q") {
                m.resume_from = t.topic;
                return {std::move(m), false};
            }
            domain = parse_domain(line);
            if (!domain) out << "  not a domain: " << line << '\n';
        }
        out << "theme: " << std::flush;
        if (!std::getline(in, line)) {
            m.resume_from = t.topic;
            return {std::move(m), false};
        }
        m.entries[t.topic] = {*domain, line, annotator};
    }
    return {std::move(m), true};
}

// ---------------------------------------------------------------------------
// Adjudication

struct Adjudication {
    DomainMapping final;
    std::vector<int> disagreements;
    double agreement_rate = 1.0;
};

// Chooses the final entry for a disputed topic.
using TieBreak = std::function<MappingEntry(int topic, const MappingEntry& a, const MappingEntry& b)>;

inline Adjudication adjudicate(const DomainMapping& a, const DomainMapping& b, const TieBreak& tie_break = {}) {
    std::set<int> ta, tb;
    for (const auto& [t, _] : a.entries) ta.insert(t);
    for (const auto& [t, _] : b.entries) tb.insert(t);
    if (ta != tb) throw IntegrityError("adjudicate: annotators mapped different topic sets");

    Adjudication r;
    for (const auto& [topic, ea] : a.entries) {
        const auto& eb = b.entries.at(topic);
        if (ea.domain == eb.domain)
            r.final.entries[topic] = ea;
        else
            r.disagreements.push_back(topic);
    }
    r.agreement_rate = ta.empty() ? 1.0
                                  : static_cast<double>(ta.size() - r.disagreements.size()) /
                                        static_cast<double>(ta.size());
    if (!r.disagreements.empty()) {
        if (!tie_break) {
            std::vector<std::string> offenders;
            std::string msg = "unresolved annotator disagreement on topics:";
            for (int t : r.disagreements) {
                msg += " " + std::to_string(t);
                offenders.push_back(std::to_string(t));
            }
            throw IntegrityError(msg, offenders);
        }
        for (int t : r.disagreements) r.final.entries[t] = tie_break(t, a.entries.at(t), b.entries.at(t));
    }
    return r;
}

// Interactive tie-break reading "a", "b" or a domain for each dispute.
inline TieBreak interactive_tie_break(std::istream& in, std::ostream& out) {
    return [&in, &out](int topic, const MappingEntry& a, const MappingEntry& b) {
        while (true) {
            out << "Topic " << topic << ": A=" << domain_name(a.domain) << " (" << a.theme << "), B="
                << domain_name(b.domain) << " (" << b.theme << ")\nagreed choice [a/b/domain]: " << std::flush;
            std::string line;
            if (!std::getline(in, line)) throw IntegrityError("adjudication aborted at topic " + std::to_string(topic));
            if (line == "a") return a;
            if (line == "b") return b;
            if (auto d = parse_domain(line)) return MappingEntry{*d, a.theme, "adjudicated"};
        }
    };
}

// ---------------------------------------------------------------------------
// Rollup

struct DomainRollup {
    std::map<MhealthDomain, std::vector<std::string>> reviews;  // every domain present, possibly empty
    std::vector<std::string> outliers;

    std::size_t count(MhealthDomain d) const { return reviews.at(d).size(); }
    std::size_t total() const {
        std::size_t n = outliers.size();
        for (const auto& [_, ids] : reviews) n += ids.size();
        return n;
    }
};

// Each review counts towards the domain of its (hard) topic assignment.
inline DomainRollup domain_rollup(const std::vector<TopicAssignment>& assignments, const DomainMapping& mapping) {
    DomainRollup r;
    for (const auto& d : kDomains) r.reviews[d.domain];
    std::set<int> unmapped;
    for (const auto& a : assignments) {
        if (a.topic == kOutlier) {
            r.outliers.push_back(a.review_id);
            continue;
        }
        auto it = mapping.entries.find(a.topic);
        if (it == mapping.entries.end()) {
            unmapped.insert(a.topic);
            continue;
        }
        r.reviews[it->second.domain].push_back(a.review_id);
    }
    if (!unmapped.empty()) {
        std::string msg = "topics without a domain mapping:";
        std::vector<std::string> offenders;
        for (int t : unmapped) {
            msg += " " + std::to_string(t);
            offenders.push_back(std::to_string(t));
        }
        throw IntegrityError(msg, offenders);
    }
    return r;
}

} // namespace emotopic
