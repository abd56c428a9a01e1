#pragma once

// Published topic-to-domain mapping with per-topic review counts chosen to
// reproduce the published domain totals. Only T0 (1078) is reported per
// topic; the other domain totals are spread evenly over their topics.

#include <map>
#include <string>
#include <vector>

#include <emotopic/cluster.hpp>
#include <emotopic/framework.hpp>
#include <emotopic/stats.hpp>

namespace published_fixture {

using emotopic::MhealthDomain;

struct Topic {
    int id;
    MhealthDomain domain;
    const char* theme;
};

inline const std::vector<Topic>& topics() {
    using D = MhealthDomain;
    static const std::vector<Topic> t = {
        {24, D::clarity_of_purpose, "Subscription Plan"},
        {3, D::developer_credibility, "Brand Image"},
        {0, D::content_validity, "Presentation of content & Accuracy"},
        {5, D::content_validity, "Accuracy"},
        {2, D::user_experience, "Functionality"},
        {11, D::user_experience, "Functionality"},
        {22, D::user_experience, "Useful feedback & Personalized Experience"},
        {12, D::user_experience, "Ease of use, Design and Functionality"},
        {7, D::interoperability, "Data Transfer (Synchronization)"},
        {26, D::interoperability, "Data Transfer (Synchronization)"},
        {18, D::interoperability, "Data Transfer (Synchronization)"},
        {9, D::interoperability, "Data Transfer (Synchronization)"},
        {14, D::interoperability, "Data Transfer (Synchronization)"},
        {15, D::interoperability, "Data Transfer (Synchronization)"},
        {8, D::interoperability, "Data Transfer (Synchronization)"},
        {1, D::value, "Perceived usefulness"},
        {6, D::value, "Perceived usefulness"},
        {23, D::value, "Perceived usefulness"},
        {16, D::value, "Perceived usefulness"},
        {28, D::value, "Perceived usefulness"},
        {10, D::value, "Increase knowledge/Awareness"},
        {4, D::technical_support, "System defect"},
        {29, D::technical_support, "System defect"},
        {19, D::technical_support, "System defect"},
        {27, D::technical_support, "System defect & Customer Support"},
        {20, D::technical_support, "System Update"},
        {21, D::technical_support, "System Update"},
        {25, D::technical_support, "System Update"},
        {17, D::privacy_ethics_legal, "Privacy"},
        {13, D::accessibility, "Availability"},
    };
    return t;
}

inline const std::map<MhealthDomain, std::size_t>& domain_totals() {
    using D = MhealthDomain;
    static const std::map<MhealthDomain, std::size_t> m = {
        {D::content_validity, 1498}, {D::interoperability, 1433}, {D::value, 1391},
        {D::technical_support, 1058}, {D::user_experience, 1057}, {D::developer_credibility, 444},
        {D::accessibility, 183},      {D::privacy_ethics_legal, 141}, {D::clarity_of_purpose, 104}};
    return m;
}

// Reviews with negative plus positive activation in the published analysis.
inline constexpr std::size_t kModeledReviews = 4285 + 3239;

inline emotopic::DomainMapping mapping() {
    emotopic::DomainMapping m;
    for (const auto& t : topics()) m.entries[t.id] = {t.domain, t.theme, "A"};
    return m;
}

inline std::map<int, std::size_t> topic_counts() {
    std::map<int, std::size_t> counts;
    counts[0] = 1078;
    counts[5] = 1498 - 1078;
    for (const auto& [domain, total] : domain_totals()) {
        if (domain == MhealthDomain::content_validity) continue;
        std::vector<int> ids;
        for (const auto& t : topics())
            if (t.domain == domain) ids.push_back(t.id);
        const std::size_t share = total / ids.size();
        for (std::size_t i = 0; i < ids.size(); ++i) counts[ids[i]] = share + (i == 0 ? total % ids.size() : 0);
    }
    return counts;
}

inline std::vector<emotopic::TopicAssignment> assignments() {
    std::vector<emotopic::TopicAssignment> a;
    std::size_t n = 0;
    for (const auto& [topic, count] : topic_counts())
        for (std::size_t i = 0; i < count; ++i) a.push_back({"r" + std::to_string(n++), topic});
    while (n < kModeledReviews) a.push_back({"r" + std::to_string(n++), emotopic::kOutlier});
    return a;
}

inline emotopic::SignificanceResult sig(double mean, double p_corrected, std::size_t n = 100) {
    emotopic::SignificanceResult r;
    r.n = n;
    r.df = n - 1;
    r.mean = mean;
    r.p = p_corrected;
    r.p_corrected = p_corrected;
    r.significant = p_corrected < 0.05;
    return r;
}

// Published domain valence, activation of the significant topics and the
// review-level neutral band counts.
inline emotopic::HypothesisInputs hypothesis_inputs() {
    using D = MhealthDomain;
    emotopic::HypothesisInputs in;
    in.domain_counts = domain_totals();
    for (const auto& d : emotopic::kDomains) in.domain_counts.try_emplace(d.domain, 0);
    in.domain_valence[D::technical_support] = sig(-0.263, 0.0001, 1058);
    in.domain_valence[D::content_validity] = sig(-0.071, 0.009, 1498);
    const std::vector<std::pair<int, double>> activation = {{2, -0.073}, {3, 0.143}, {14, -0.142}, {21, 0.337}};
    const std::vector<double> p = {0.045, 0.0001, 0.001, 0.0001};
    for (std::size_t i = 0; i < activation.size(); ++i) {
        emotopic::TopicStats t;
        t.topic = activation[i].first;
        t.activation = sig(activation[i].second, p[i]);
        t.valence = sig(0.0, 1.0);
        in.topics.push_back(t);
    }
    emotopic::TopicStats flat;
    flat.topic = 9;
    flat.activation = sig(0.2, 0.4);
    in.topics.push_back(flat);
    in.reviews.n_below = 106;
    in.reviews.n_above = 247;
    in.reviews.median = -0.07;
    return in;
}

} // namespace published_fixture
