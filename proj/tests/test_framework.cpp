#include <gtest/gtest.h>

#include <sstream>

#include <emotopic/framework.hpp>

#include "published_fixture.hpp"
#include "support.hpp"

using namespace emotopic;

namespace {

std::vector<TopicPresentation> presentations(int n) {
    std::vector<TopicPresentation> out;
    for (int t = 0; t < n; ++t) out.push_back({t, {"term" + std::to_string(t)}, {"sample review"}});
    return out;
}

DomainMapping uniform(int n, MhealthDomain d) {
    DomainMapping m;
    for (int t = 0; t < n; ++t) m.entries[t] = {d, "theme " + std::to_string(t), "A"};
    return m;
}

} // namespace

TEST(Domains, ParseByIdNumberAndName) {
    EXPECT_EQ(parse_domain("8"), MhealthDomain::technical_support);
    EXPECT_EQ(parse_domain("technical_support"), MhealthDomain::technical_support);
    EXPECT_EQ(parse_domain("Technical features and support"), MhealthDomain::technical_support);
    EXPECT_EQ(parse_domain("11"), std::nullopt);
    EXPECT_EQ(parse_domain("games"), std::nullopt);
    EXPECT_EQ(kDomains.size(), 10u);
}

TEST(MappingFile, RoundTripWithResumeMarker) {
    testing_support::TempDir dir;
    auto m = uniform(3, MhealthDomain::value);
    m.entries[1].theme = "tab\tinside";
    m.resume_from = 3;
    save_mapping(dir.file("m.tsv"), m);
    EXPECT_EQ(load_mapping(dir.file("m.tsv")), m);
}

TEST(MappingFile, UnknownDomainIsParseError) {
    testing_support::TempDir dir;
    testing_support::write_file(dir.file("m.tsv"), "topic_id\tdomain_id\ttheme\tannotator\n0\tgames\tx\tA\n");
    EXPECT_THROW(load_mapping(dir.file("m.tsv")), ParseError);
}

TEST(Session, PrefilledPassesThrough) {
    auto existing = uniform(4, MhealthDomain::value);
    std::istringstream in;
    std::ostringstream out;
    auto r = mapping_session(presentations(4), "A", existing, in, out);
    EXPECT_TRUE(r.complete);
    EXPECT_EQ(r.mapping, existing);
    EXPECT_TRUE(out.str().empty());
}

TEST(Session, RecordsCrashTopicAsTechnicalSupport) {
    std::vector<TopicPresentation> topics = {{4, {"crash", "freeze", "restart"}, {"It crashes every morning."}}};
    std::istringstream in("Technical features and support\nSystem defect\n");
    std::ostringstream out;
    auto r = mapping_session(topics, "A", {}, in, out);
    ASSERT_TRUE(r.complete);
    EXPECT_EQ(r.mapping.entries.at(4).domain, MhealthDomain::technical_support);
    EXPECT_EQ(r.mapping.entries.at(4).theme, "System defect");
    EXPECT_NE(out.str().find("crash freeze restart"), std::string::npos);
}

TEST(Session, ThirtyTopicsAllValid) {
    std::string answers;
    for (int t = 0; t < 30; ++t) answers += std::to_string(1 + t % 10) + "\ntheme\n";
    std::istringstream in("bogus\n" + answers);
    std::ostringstream out;
    auto r = mapping_session(presentations(30), "A", {}, in, out);
    ASSERT_TRUE(r.complete);
    EXPECT_EQ(r.mapping.entries.size(), 30u);
    EXPECT_EQ(r.mapping.entries.at(0).domain, MhealthDomain::clarity_of_purpose);
    EXPECT_EQ(r.mapping.entries.at(29).domain, MhealthDomain::accessibility);
}

TEST(Session, StopAndResume) {
    std::istringstream first("3\nbmi\nq\n");
    std::ostringstream out;
    auto partial = mapping_session(presentations(3), "A", {}, first, out);
    EXPECT_FALSE(partial.complete);
    EXPECT_EQ(partial.mapping.resume_from, 1);
    EXPECT_EQ(partial.mapping.entries.size(), 1u);
    std::istringstream second("4\nux\n6\nsync\n");
    auto done = mapping_session(presentations(3), "A", partial.mapping, second, out);
    EXPECT_TRUE(done.complete);
    EXPECT_EQ(done.mapping.entries.size(), 3u);
    EXPECT_EQ(done.mapping.entries.at(0).theme, "bmi");
    EXPECT_FALSE(done.mapping.resume_from.has_value());
}

TEST(Adjudicate, IdenticalMappingsAgree) {
    auto a = uniform(5, MhealthDomain::value);
    auto r = adjudicate(a, a);
    EXPECT_EQ(r.final, a);
    EXPECT_TRUE(r.disagreements.empty());
    EXPECT_EQ(r.agreement_rate, 1.0);
}

TEST(Adjudicate, TwoOfThirtyDiffer) {
    auto a = uniform(30, MhealthDomain::value);
    auto b = a;
    b.entries[7].domain = MhealthDomain::interoperability;
    b.entries[21].domain = MhealthDomain::technical_support;
    EXPECT_THROW(adjudicate(a, b), IntegrityError);
    auto r = adjudicate(a, b, [](int, const MappingEntry&, const MappingEntry& eb) { return eb; });
    EXPECT_EQ(r.disagreements, (std::vector<int>{7, 21}));
    EXPECT_NEAR(r.agreement_rate, 28.0 / 30.0, 1e-15);
    EXPECT_NEAR(r.agreement_rate, 0.933, 5e-4);
    EXPECT_EQ(r.final.entries.at(21).domain, MhealthDomain::technical_support);
    EXPECT_EQ(r.final.entries.at(0).domain, MhealthDomain::value);
}

TEST(Adjudicate, InteractiveTieBreak) {
    auto a = uniform(2, MhealthDomain::value);
    auto b = a;
    b.entries[1].domain = MhealthDomain::accessibility;
    std::istringstream in("maybe\nb\n");
    std::ostringstream out;
    auto r = adjudicate(a, b, interactive_tie_break(in, out));
    EXPECT_EQ(r.final.entries.at(1).domain, MhealthDomain::accessibility);
}

TEST(Rollup, PublishedCounts) {
    auto r = domain_rollup(published_fixture::assignments(), published_fixture::mapping());
    EXPECT_EQ(r.count(MhealthDomain::content_validity), 1498u);
    EXPECT_EQ(r.count(MhealthDomain::interoperability), 1433u);
    EXPECT_EQ(r.count(MhealthDomain::value), 1391u);
    EXPECT_EQ(r.count(MhealthDomain::technical_support), 1058u);
    EXPECT_EQ(r.count(MhealthDomain::engagement_social_support), 0u);
    EXPECT_EQ(r.total(), published_fixture::kModeledReviews);
    std::size_t sum = r.outliers.size();
    for (const auto& [d, ids] : r.reviews) sum += ids.size();
    EXPECT_EQ(sum, published_fixture::assignments().size());
}

TEST(Rollup, EmptyAssignmentsAllZero) {
    auto r = domain_rollup({}, published_fixture::mapping());
    EXPECT_EQ(r.reviews.size(), 10u);
    for (const auto& [d, ids] : r.reviews) EXPECT_TRUE(ids.empty());
    EXPECT_EQ(r.total(), 0u);
}

TEST(Rollup, UnmappedTopicIsIntegrityError) {
    try {
        domain_rollup({{"x", 99}}, published_fixture::mapping());
        FAIL();
    } catch (const IntegrityError& e) {
        EXPECT_EQ(e.offenders(), std::vector<std::string>{"99"});
    }
}

TEST(NearestToCentroid, PicksClosestMembers) {
    EmbeddingMatrix m;
    m.dim = 1;
    m.review_ids = {"a", "b", "c", "d"};
    m.data = {0.0, 1.0, 2.0, 100.0};
    m.flagged.assign(4, false);
    std::vector<TopicAssignment> a = {{"a", 0}, {"b", 0}, {"c", 0}, {"d", 1}};
    EXPECT_EQ(nearest_to_centroid(m, a, 0, 1), std::vector<std::string>{"b"});
    EXPECT_EQ(nearest_to_centroid(m, a, 1, 3), std::vector<std::string>{"d"});
}
