#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include <emotopic/embeddings.hpp>
#include <emotopic/pca.hpp>

#include "oracles.hpp"
#include "support.hpp"

using namespace emotopic;
using testing_support::doc;

namespace {

double cosine(const EmbeddingMatrix& m, std::size_t i, std::size_t j) {
    double dot = 0, ni = 0, nj = 0;
    for (std::size_t k = 0; k < m.dim; ++k) {
        dot += m.at(i, k) * m.at(j, k);
        ni += m.at(i, k) * m.at(i, k);
        nj += m.at(j, k) * m.at(j, k);
    }
    return dot / std::sqrt(ni * nj);
}

std::uint64_t fnv(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Dense hashed TF-IDF over all 2^18 buckets, then the projection, entry by entry.
std::vector<std::vector<double>> brute_force_embed(const std::vector<TokenizedDoc>& docs, std::size_t dim,
                                                   std::uint64_t seed) {
    const std::size_t buckets = std::size_t{1} << 18;
    std::vector<std::vector<double>> tf(docs.size(), std::vector<double>(buckets, 0.0));
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (const auto& t : docs[i].model_tokens) tf[i][fnv(t) % buckets] += 1.0;
    std::vector<double> df(buckets, 0.0);
    for (const auto& v : tf)
        for (std::size_t b = 0; b < buckets; ++b) df[b] += v[b] > 0;
    const double n = static_cast<double>(docs.size());
    std::vector<std::vector<double>> out(docs.size(), std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t b = 0; b < buckets; ++b) {
            if (tf[i][b] == 0) continue;
            const double w = tf[i][b] * (std::log((1 + n) / (1 + df[b])) + 1);
            for (std::size_t j = 0; j < dim; ++j)
                out[i][j] += w * projection_entry(seed, static_cast<std::uint32_t>(b), j, dim);
        }
        double norm = 0;
        for (double x : out[i]) norm += x * x;
        for (double& x : out[i]) x /= std::sqrt(norm);
    }
    return out;
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t k, const std::string& prefix) {
    std::vector<std::string> w;
    for (std::size_t i = 0; i < k; ++i) w.push_back(prefix + std::to_string(rng() % 100000));
    return w;
}

EmbeddingMatrix matrix(std::vector<std::vector<double>> rows) {
    EmbeddingMatrix m;
    m.dim = rows.at(0).size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.review_ids.push_back("r" + std::to_string(i));
        m.data.insert(m.data.end(), rows[i].begin(), rows[i].end());
    }
    m.flagged.assign(rows.size(), false);
    return m;
}

} // namespace

TEST(EmbedBuiltin, IdenticalDocsIdenticalRows) {
    auto m = embed_builtin({doc("a", {"sync", "watch"}), doc("b", {"sync", "watch"}), doc("c", {"bmi"})}, 64, 3);
    EXPECT_EQ(0, std::memcmp(m.row(0), m.row(1), 64 * sizeof(double)));
}

TEST(EmbedBuiltin, UnitNormsAndFlaggedZeros) {
    testing_support::QuietWarnings quiet;
    std::mt19937_64 rng(1);
    std::vector<TokenizedDoc> docs;
    for (int i = 0; i < 50; ++i) docs.push_back(doc("d" + std::to_string(i), random_words(rng, 1 + i % 9, "w")));
    docs.push_back(doc("empty", {}));
    auto m = embed_builtin(docs, 128, 9);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double norm = 0;
        for (std::size_t j = 0; j < m.dim; ++j) {
            ASSERT_TRUE(std::isfinite(m.at(i, j)));
            norm += m.at(i, j) * m.at(i, j);
        }
        if (m.flagged[i])
            EXPECT_EQ(norm, 0.0);
        else
            EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
    }
    EXPECT_TRUE(m.flagged.back());
}

TEST(EmbedBuiltin, DeterministicBytes) {
    std::vector<TokenizedDoc> docs = {doc("a", {"x", "y"}), doc("b", {"y", "z", "z"})};
    auto a = embed_builtin(docs, 32, 77), b = embed_builtin(docs, 32, 77), c = embed_builtin(docs, 32, 78);
    EXPECT_EQ(0, std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)));
    EXPECT_NE(a.data, c.data);
}

TEST(EmbedBuiltin, MatchesBruteForceHashingOracle) {
    std::mt19937_64 rng(4);
    std::vector<TokenizedDoc> docs;
    for (int i = 0; i < 6; ++i) docs.push_back(doc("d" + std::to_string(i), random_words(rng, 8, i % 2 ? "a" : "b")));
    auto m = embed_builtin(docs, 48, 5);
    auto ref = brute_force_embed(docs, 48, 5);
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::size_t j = 0; j < 48; ++j) EXPECT_NEAR(m.at(i, j), ref[i][j], 1e-12);
}

TEST(EmbedBuiltin, DisjointVocabulariesAreNearOrthogonal) {
    // Cosine of two disjoint-vocabulary documents against the spread of
    // cosines between random pairs of hashed vectors with the same sparsity.
    const std::size_t dim = 256, k = 12;
    std::mt19937_64 rng(11);
    std::vector<double> random_cos;
    for (int trial = 0; trial < 200; ++trial) {
        auto m = embed_builtin({doc("x", random_words(rng, k, "p")), doc("y", random_words(rng, k, "q"))}, dim,
                               static_cast<std::uint64_t>(trial));
        random_cos.push_back(std::abs(cosine(m, 0, 1)));
    }
    const double bound = *std::max_element(random_cos.begin(), random_cos.end());
    EXPECT_LT(bound, 6.0 / std::sqrt(static_cast<double>(dim)));

    std::vector<std::string> a = {"pressure", "cuff", "reading", "accuracy", "doctor", "systolic"};
    std::vector<std::string> b = {"bluetooth", "pairing", "watch", "sync", "crash", "update"};
    std::set<std::uint64_t> ba, bb;
    for (const auto& t : a) ba.insert(fnv(t) % kHashBuckets);
    for (const auto& t : b) bb.insert(fnv(t) % kHashBuckets);
    for (auto x : ba) ASSERT_FALSE(bb.contains(x)) << "hash collision makes the oracle premise false";

    auto m = embed_builtin({doc("a", a), doc("b", b)}, dim, 42);
    EXPECT_LE(std::abs(cosine(m, 0, 1)), bound);
    auto same = embed_builtin({doc("a", a), doc("b", a)}, dim, 42);
    EXPECT_NEAR(cosine(same, 0, 1), 1.0, 1e-12);
}

TEST(EmbFile, RoundTripIsBitIdentical) {
    testing_support::TempDir dir;
    auto m = embed_builtin({doc("a", {"x"}), doc("b", {"y", "z"}), doc("c", {"q"})}, 16, 1);
    for (auto& v : m.data) v = static_cast<float>(v);  // storage precision
    save_embeddings(dir.file("m.emb"), m);
    auto back = load_embeddings(dir.file("m.emb"), m.review_ids);
    EXPECT_EQ(back.review_ids, m.review_ids);
    EXPECT_EQ(0, std::memcmp(back.data.data(), m.data.data(), m.data.size() * sizeof(double)));
    save_embeddings(dir.file("m2.emb"), back);
    EXPECT_EQ(testing_support::read_file(dir.file("m.emb")), testing_support::read_file(dir.file("m2.emb")));
}

TEST(EmbFile, HeaderLayout) {
    testing_support::TempDir dir;
    auto m = matrix({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    save_embeddings(dir.file("m.emb"), m);
    const auto bytes = testing_support::read_file(dir.file("m.emb"));
    ASSERT_EQ(bytes.size(), 4u + 4 + 8 + 8 + 6 * 4);
    EXPECT_EQ(bytes.substr(0, 4), "EMBF");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[8], 2);   // n
    EXPECT_EQ(bytes[16], 3);  // dim
    float first;
    std::memcpy(&first, bytes.data() + 24, 4);
    EXPECT_EQ(first, 1.0f);
}

TEST(EmbFile, ShuffledFileAlignsToCorpusOrder) {
    testing_support::TempDir dir;
    auto m = matrix({{1, 0}, {0, 1}, {1, 1}});
    save_embeddings(dir.file("m.emb"), m);
    auto aligned = load_embeddings(dir.file("m.emb"), std::vector<std::string>{"r2", "r0", "r1"});
    EXPECT_EQ(aligned.review_ids, (std::vector<std::string>{"r2", "r0", "r1"}));
    EXPECT_EQ(aligned.at(0, 0), 1.0);
    EXPECT_EQ(aligned.at(0, 1), 1.0);
    EXPECT_EQ(aligned.at(2, 1), 1.0);
}

TEST(EmbFile, MissingIdNamed) {
    testing_support::TempDir dir;
    save_embeddings(dir.file("m.emb"), matrix({{1, 0}, {0, 1}}));
    try {
        load_embeddings(dir.file("m.emb"), std::vector<std::string>{"r0", "r1", "r9"});
        FAIL();
    } catch (const AlignmentError& e) {
        EXPECT_EQ(e.offenders(), std::vector<std::string>{"r9"});
        EXPECT_NE(std::string(e.what()).find("r9"), std::string::npos);
    }
}

TEST(EmbFile, RejectsCorruptFiles) {
    testing_support::TempDir dir;
    save_embeddings(dir.file("m.emb"), matrix({{1, 0}, {0, 1}}));
    auto bytes = testing_support::read_file(dir.file("m.emb"));
    testing_support::write_file(dir.file("t.emb"), bytes + "x");
    testing_support::write_file(dir.file("t.emb.ids"), "r0\nr1\n");
    EXPECT_THROW(read_embeddings(dir.file("t.emb")), ParseError);
    auto nan = bytes;
    const float q = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nan.data() + 24, &q, 4);
    testing_support::write_file(dir.file("t.emb"), nan);
    EXPECT_THROW(read_embeddings(dir.file("t.emb")), ValidationError);
    testing_support::write_file(dir.file("t.emb"), "XXXX" + bytes.substr(4));
    EXPECT_THROW(read_embeddings(dir.file("t.emb")), ParseError);
}

TEST(Pca, ExactOnAffineSubspace) {
    // 40 points in a 3-dim affine subspace of R^8.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> basis(3, std::vector<double>(8)), rows;
    for (auto& b : basis)
        for (auto& x : b) x = g(rng);
    std::vector<double> offset(8);
    for (auto& x : offset) x = g(rng);
    for (int i = 0; i < 40; ++i) {
        std::vector<double> r = offset;
        for (const auto& b : basis) {
            const double c = g(rng);
            for (int j = 0; j < 8; ++j) r[j] += c * b[j];
        }
        rows.push_back(r);
    }
    auto m = matrix(rows);
    auto fit = fit_pca(m, 3);
    EXPECT_EQ(fit.rank, 3u);
    double err = 0;
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd rec = fit.mean + fit.components * fit.scores.row(i).transpose();
        for (int j = 0; j < 8; ++j) err = std::max(err, std::abs(rec(j) - rows[i][j]));
    }
    EXPECT_LE(err, 1e-9);
}

TEST(Pca, TargetMustBeBelowDim) {
    auto m = matrix({{1, 2, 3}, {2, 1, 0}, {0, 0, 1}});
    EXPECT_THROW(reduce_dimensions(m, 3, 0), ConfigError);
    EXPECT_THROW(reduce_dimensions(m, 1, 0), ConfigError);
}

TEST(Pca, EigenvaluesMatchJacobiOracle) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<std::vector<double>> rows(10, std::vector<double>(5));
    for (auto& r : rows)
        for (auto& x : r) x = u(rng);
    // population covariance by hand
    std::vector<double> mean(5, 0.0);
    for (const auto& r : rows)
        for (int j = 0; j < 5; ++j) mean[j] += r[j] / 10.0;
    std::vector<std::vector<double>> cov(5, std::vector<double>(5, 0.0));
    for (const auto& r : rows)
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / 10.0;
    const auto ev = oracle::jacobi_eigenvalues(cov);

    auto m = matrix(rows);
    auto fit = fit_pca(m, 4);
    auto reduced = reduce_dimensions(m, 4, 0);
    for (int c = 0; c < 4; ++c) {
        EXPECT_NEAR(fit.eigenvalues(c), ev[c], 1e-10);
        double var = 0, mu = 0;
        for (int i = 0; i < 10; ++i) mu += reduced.at(i, c) / 10.0;
        for (int i = 0; i < 10; ++i) var += (reduced.at(i, c) - mu) * (reduced.at(i, c) - mu) / 10.0;
        EXPECT_NEAR(var, ev[c], 1e-10);
    }
}

TEST(Pca, RankDeficientPadsWithZeros) {
    std::vector<std::string> warnings;
    diag::ScopedSink sink([&](const std::string& w) { warnings.push_back(w); });
    auto m = matrix({{1, 1, 0, 0}, {2, 2, 0, 0}, {3, 3, 0, 0}});
    auto r = reduce_dimensions(m, 3, 0);
    EXPECT_EQ(warnings.size(), 1u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.at(i, 1), 0.0);
        EXPECT_EQ(r.at(i, 2), 0.0);
    }
}
