#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include <emotopic/report.hpp>

#include "published_fixture.hpp"
#include "support.hpp"

using namespace emotopic;

namespace {

ReportBundle bundle() {
    ReportBundle b;
    b.topic_table = std::vector<TopicRow>{{0, "Accuracy", MhealthDomain::content_validity, 12, {"reading", "meter"}},
                                          {1, "Sync", MhealthDomain::interoperability, 8, {"sync", "watch"}}};
    TopicStats t0, t1;
    t0.topic = 0;
    t0.valence = published_fixture::sig(0.2, 0.0004);
    t0.activation = published_fixture::sig(0.337, 0.0002);
    t1.topic = 1;
    t1.valence = published_fixture::sig(-0.3, 0.02);
    t1.activation = published_fixture::sig(-0.1, 0.5);
    b.topic_stats = std::vector<TopicStats>{t0, t1};
    b.domain_table = std::vector<DomainRow>{{MhealthDomain::content_validity, 12, published_fixture::sig(0.2, 0.0004)},
                                            {MhealthDomain::accessibility, 0, std::nullopt}};
    b.hypotheses = evaluate_hypotheses(published_fixture::hypothesis_inputs());
    b.histogram = histogram({0.0, 0.5, 1.0}, 0.25);
    b.coherence_curve = std::vector<CurvePoint>{{2, 0.1, 1.0}};
    b.themes = {{0, "Accuracy"}, {1, "Sync"}};
    return b;
}

} // namespace

TEST(Report, PValueFormatting) {
    EXPECT_EQ(format_p(0.0004), "<0.001");
    EXPECT_EQ(format_p(0.001), "0.001");
    EXPECT_EQ(format_p(0.045), "0.045");
    EXPECT_EQ(format_mean(-0.0734), "-0.073");
}

TEST(Report, ValenceSortedAscending) {
    auto files = render_to_strings(bundle(), ReportFormat::tsv);
    const auto& v = files.at("valence.tsv");
    EXPECT_LT(v.find("Sync"), v.find("Accuracy"));
    EXPECT_NE(v.find("<0.001"), std::string::npos);
    const auto& act = files.at("activation.tsv");
    EXPECT_NE(act.find("0.337"), std::string::npos);
    EXPECT_EQ(act.find("Sync"), std::string::npos);
    EXPECT_NE(files.at("hypotheses.tsv").find("H1a\tEmotion generation\tsupported"), std::string::npos);
}

TEST(Report, MarkdownTables) {
    auto files = render_to_strings(bundle(), ReportFormat::markdown);
    EXPECT_TRUE(files.contains("topics.md"));
    EXPECT_EQ(files.at("domains.md").rfind("| domain | n | valence_mean | p |\n| --- |", 0), 0u);
    EXPECT_NE(files.at("domains.md").find("| Accessibility | 0 | - | - |"), std::string::npos);
}

TEST(Report, IncompleteBundleWritesNothing) {
    testing_support::TempDir dir;
    auto b = bundle();
    b.hypotheses.reset();
    EXPECT_THROW(render(b, ReportFormat::tsv, dir.path() / "r"), DependencyError);
    EXPECT_FALSE(std::filesystem::exists(dir.path() / "r"));
    b = bundle();
    b.histogram = std::vector<HistogramBin>{};
    EXPECT_THROW(render(b, ReportFormat::tsv, dir.path() / "r"), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(dir.path() / "r"));
    EXPECT_EQ(render(bundle(), ReportFormat::tsv, dir.path() / "r").size(), 7u);
}

TEST(Histogram, SmallCase) {
    auto h = histogram({0.0, 0.5, 1.0}, 0.25);
    ASSERT_EQ(h.size(), 5u);
    EXPECT_EQ(h[0].count, 1u);
    EXPECT_EQ(h[2].count, 1u);
    EXPECT_EQ(h[4].count, 1u);
    EXPECT_EQ(h[4].lo, 1.0);
    EXPECT_THROW(histogram({1.0}, 0.0), ConfigError);
    EXPECT_TRUE(histogram({}, 0.25).empty());
}

TEST(Histogram, ConservesCountsAndShowsSkew) {
    std::mt19937_64 rng(11);
    std::exponential_distribution<double> e(2.0);
    std::vector<double> v(2000);
    for (auto& x : v) x = e(rng) - 0.3;
    auto h = histogram(v, 0.25);
    std::size_t n = 0;
    for (const auto& b : h) {
        n += b.count;
        EXPECT_NEAR(b.hi - b.lo, 0.25, 1e-12);
    }
    EXPECT_EQ(n, v.size());
    EXPECT_LE(h.front().lo, *std::min_element(v.begin(), v.end()));
    EXPECT_GT(h.back().hi, *std::max_element(v.begin(), v.end()));
    // Right skew: mean above median.
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    EXPECT_GT(mean, math::median(v));
}
