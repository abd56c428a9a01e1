#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pipeline_fixture.hpp"
#include "support.hpp"

using namespace emotopic;
using testing_support::read_file;

namespace {

std::vector<std::string> artifacts(const std::filesystem::path& root) {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(std::filesystem::relative(e.path(), root).string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Pipeline, StageNames) {
    for (auto s : kAllStages) EXPECT_EQ(parse_stage(stage_name(s)), s);
    EXPECT_EQ(parse_stage("fetch"), Stage::fetch);
    EXPECT_EQ(parse_stage("nope"), std::nullopt);
}

TEST(Pipeline, DependencyOrderEnforced) {
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    Pipeline p({pipeline_fixture::synthetic_config(dir.file("out"))});
    try {
        p.run(Stage::stats);
        FAIL();
    } catch (const DependencyError& e) {
        EXPECT_NE(std::string(e.what()).find("emotopic run"), std::string::npos);
    }
}

TEST(Pipeline, SeedRequired) {
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    auto c = pipeline_fixture::synthetic_config(dir.file("out"));
    c.seed.reset();
    Pipeline p({c});
    p.run(Stage::ingest);
    EXPECT_THROW(p.run(Stage::split), ConfigError);
}

TEST(Pipeline, DeterministicAndIdempotent) {
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    const auto a = dir.path() / "a", b = dir.path() / "b";
    Pipeline pa({pipeline_fixture::synthetic_config(a.string())});
    for (const auto& o : pa.run_all()) EXPECT_FALSE(o.skipped) << stage_name(o.stage);
    Pipeline pb({pipeline_fixture::synthetic_config(b.string())});
    pb.run_all();

    const auto files = artifacts(a);
    ASSERT_EQ(files, artifacts(b));
    EXPECT_TRUE(std::find(files.begin(), files.end(), "reports/hypotheses.md") != files.end());
    for (const auto& f : files) EXPECT_EQ(read_file((a / f).string()), read_file((b / f).string())) << f;

    const auto before = read_file((a / "manifests/report.json").string());
    for (const auto& o : pa.run_all()) EXPECT_TRUE(o.skipped) << stage_name(o.stage);
    EXPECT_EQ(read_file((a / "manifests/report.json").string()), before);

    // A missing output forces that stage to run again.
    std::filesystem::remove(a / "stats/stats.tsv");
    EXPECT_FALSE(pa.run(Stage::stats).skipped);
    EXPECT_EQ(read_file((a / "stats/stats.tsv").string()), read_file((b / "stats/stats.tsv").string()));
}

TEST(Pipeline, IncompleteMappingNeedsSession) {
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    auto c = pipeline_fixture::synthetic_config(dir.file("out"));
    c.mapping = dir.file("mapping.tsv");
    {
        Pipeline p({c});
        for (auto s : {Stage::ingest, Stage::split, Stage::preprocess, Stage::embed, Stage::topics}) p.run(s);
        EXPECT_THROW(p.run(Stage::map), DependencyError);
    }

    c.interactive = true;
    std::string answers;
    for (int t = 0; t < 12; ++t) answers += "value\ntheme\n";
    std::istringstream in(answers);
    std::ostringstream out;
    Pipeline p({c, {}, &in, &out});
    p.run(Stage::map);
    const auto m = load_mapping(dir.file("out/mapping.tsv"));
    EXPECT_FALSE(m.entries.empty());
    for (const auto& [_, e] : m.entries) EXPECT_EQ(e.domain, MhealthDomain::value);
    EXPECT_NE(out.str().find("domain (1-10"), std::string::npos);
}

TEST(Pipeline, StoppedSessionSavesProgress) {
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    auto c = pipeline_fixture::synthetic_config(dir.file("out"));
    c.mapping = dir.file("mapping.tsv");
    c.interactive = true;
    std::istringstream in("4\nfirst\nq\n");
    std::ostringstream out;
    Pipeline p({c, {}, &in, &out});
    for (auto s : {Stage::ingest, Stage::split, Stage::preprocess, Stage::embed, Stage::topics}) p.run(s);
    EXPECT_THROW(p.run(Stage::map), DependencyError);
    const auto m = load_mapping(c.mapping);
    EXPECT_EQ(m.entries.size(), 1u);
    EXPECT_TRUE(m.resume_from.has_value());
}

TEST(Pipeline, ExternalEmbeddingsAndEmotionsLoad) {
    // Files shaped like model exports over modeling.jsonl, written in a
    // different row order.
    testing_support::QuietWarnings quiet;
    testing_support::TempDir dir;
    auto c = pipeline_fixture::synthetic_config(dir.file("out"));
    c.embeddings = dir.file("export.emb");
    c.emotions = dir.file("export.tsv");
    Pipeline p({c});
    for (auto s : {Stage::ingest, Stage::split, Stage::preprocess}) p.run(s);

    auto modeling = load_reviews(dir.file("out/modeling.jsonl"));
    std::vector<TokenizedDoc> docs;
    std::vector<std::string> ids;
    for (auto it = modeling.records.rbegin(); it != modeling.records.rend(); ++it) {
        docs.push_back(preprocess(*it, {}));
        ids.push_back(it->review_id);
    }
    save_embeddings(c.embeddings, embed_builtin(docs, 64, 5));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<EmotionRow> rows(ids.size());
    for (auto& r : rows)
        for (auto& v : r) v = u(rng) / static_cast<double>(kNumEmotions);
    save_emotions(c.emotions, ids, rows);

    for (auto s : {Stage::embed, Stage::topics, Stage::emotions}) ASSERT_NO_THROW(p.run(s)) << stage_name(s);
    auto meta = pipeline_detail::read_json(dir.path() / "out/emotions/meta.json");
    EXPECT_EQ(meta["source"], "external");
    auto emb = read_embeddings(dir.file("out/embeddings.emb"));
    EXPECT_EQ(emb.dim, 64u);
    EXPECT_EQ(emb.rows(), ids.size());
    EXPECT_EQ(emb.review_ids.front(), modeling.records.front().review_id);
}
