#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "diag.hpp"
#include "error.hpp"
#include "hash.hpp"

namespace emotopic {

// Row-major n x dim matrix of document vectors aligned with review_ids.
struct EmbeddingMatrix {
    std::vector<std::string> review_ids;
    std::size_t dim = 0;
    std::vector<double> data;
    std::vector<bool> flagged;  // rows produced from empty documents

    std::size_t rows() const noexcept { return review_ids.size(); }
    const double* row(std::size_t i) const noexcept { return data.data() + i * dim; }
    double* row(std::size_t i) noexcept { return data.data() + i * dim; }
    double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

inline constexpr std::size_t kHashBuckets = std::size_t{1} << 18;

inline std::uint32_t hash_bucket(std::string_view token) noexcept {
    return static_cast<std::uint32_t>(fnv1a64(token) & (kHashBuckets - 1));
}

// Sparse hashed TF-IDF vectors, bucket -> weight, before projection.
// idf = ln((1 + n) / (1 + df)) + 1.
inline std::vector<std::map<std::uint32_t, double>> hashed_tfidf(const std::vector<TokenizedDoc>& docs) {
    std::vector<std::map<std::uint32_t, double>> tf(docs.size());
    std::unordered_map<std::uint32_t, std::size_t> df;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& t : docs[i].model_tokens) tf[i][hash_bucket(t)] += 1.0;
        for (const auto& [b, _] : tf[i]) ++df[b];
    }
    const double n = static_cast<double>(docs.size());
    for (auto& v : tf)
        for (auto& [b, w] : v) w *= std::log((1.0 + n) / (1.0 + static_cast<double>(df[b]))) + 1.0;
    return tf;
}

// Entry (bucket, j) of the random projection: a seeded +-1 sign scaled by 1/sqrt(dim).
inline double projection_entry(std::uint64_t seed, std::uint32_t bucket, std::size_t j, std::size_t dim) noexcept {
    const std::uint64_t h = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(bucket) << 20) ^ j));
    return (h >> 63 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(dim));
}

// Deterministic document vectors: feature hashing, TF-IDF weighting, a seeded
// sign projection to `dim` dimensions, then L2 normalization. Documents
// without model tokens become zero rows and are flagged.
inline EmbeddingMatrix embed_builtin(const std::vector<TokenizedDoc>& docs, std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw ConfigError("embedding dim must be >= 2");
    if (docs.empty()) throw ConfigError("cannot embed an empty document list");
    auto sparse = hashed_tfidf(docs);

    EmbeddingMatrix m;
    m.dim = dim;
    m.data.assign(docs.size() * dim, 0.0);
    m.flagged.assign(docs.size(), false);
    std::size_t n_flagged = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        m.review_ids.push_back(docs[i].review_id);
        double* r = m.row(i);
        for (const auto& [bucket, w] : sparse[i])
            for (std::size_t j = 0; j < dim; ++j) r[j] += w * projection_entry(seed, bucket, j, dim);
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) norm += r[j] * r[j];
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            m.flagged[i] = true;
            ++n_flagged;
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j) r[j] /= norm;
    }
    if (n_flagged) diag::warn(std::to_string(n_flagged) + " document(s) embedded as zero vectors");
    return m;
}

// ---------------------------------------------------------------------------
// .emb interchange: "EMBF", u32 version, u64 n, u64 dim, then n*dim
// little-endian float32 values; ids in a sidecar "<path>.ids", one per line.

inline constexpr char kEmbMagic[4] = {'E', 'M', 'B', 'F'};
inline constexpr std::uint32_t kEmbVersion = 1;

namespace detail {
template <class T>
void put_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError("embedding file truncated");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}
} // namespace detail

inline void save_embeddings(const std::string& path, const EmbeddingMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write embeddings: " + path);
    out.write(kEmbMagic, 4);
    detail::put_le<std::uint32_t>(out, kEmbVersion);
    detail::put_le<std::uint64_t>(out, m.rows());
    detail::put_le<std::uint64_t>(out, m.dim);
    for (double v : m.data) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::ofstream ids(path + ".ids", std::ios::binary);
    if (!ids) throw ConfigError("cannot write embedding ids: " + path + ".ids");
    for (const auto& id : m.review_ids) ids << id << '\n';
}

// Reads the file as stored, without corpus alignment.
inline EmbeddingMatrix read_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open embeddings: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kEmbMagic, 4) != 0) throw ParseError("not an .emb file: " + path);
    if (auto v = detail::get_le<std::uint32_t>(in); v != kEmbVersion)
        throw ParseError("unsupported .emb version " + std::to_string(v));
    const auto n = detail::get_le<std::uint64_t>(in);
    const auto dim = detail::get_le<std::uint64_t>(in);
    if (dim == 0) throw ParseError(".emb declares zero dimensions");

    EmbeddingMatrix m;
    m.dim = dim;
    m.data.resize(n * dim);
    for (std::size_t k = 0; k < n * dim; ++k) {
        const float f = std::bit_cast<float>(detail::get_le<std::uint32_t>(in));
        if (!std::isfinite(f))
            throw ValidationError("non-finite value in embeddings at row " + std::to_string(k / dim));
        m.data[k] = f;
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(".emb has trailing bytes");

    std::ifstream ids(path + ".ids");
    if (!ids) throw ConfigError("cannot open embedding ids: " + path + ".ids");
    std::string line;
    while (tsv::read_line(ids, line))
        if (!line.empty()) m.review_ids.push_back(line);
    if (m.review_ids.size() != n)
        throw ParseError(".emb header declares " + std::to_string(n) + " rows but ids sidecar has " +
                         std::to_string(m.review_ids.size()));
    m.flagged.assign(n, false);
    for (std::size_t i = 0; i < n; ++i)
        m.flagged[i] = std::all_of(m.row(i), m.row(i) + dim, [](double v) { return v == 0.0; });
    return m;
}

// Reorders rows to `order`. Every id must appear exactly once on both sides.
inline EmbeddingMatrix align_embeddings(const EmbeddingMatrix& m, const std::vector<std::string>& order) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> dup;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!index.emplace(m.review_ids[i], i).second) dup.push_back(m.review_ids[i]);
    if (!dup.empty()) throw AlignmentError("duplicate ids in embeddings", dup);

    std::vector<std::string> missing;
    std::unordered_set<std::string> wanted(order.begin(), order.end());
    for (const auto& id : order)
        if (!index.contains(id)) missing.push_back(id);
    std::vector<std::string> extra;
    for (const auto& id : m.review_ids)
        if (!wanted.contains(id)) extra.push_back(id);
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "embedding/corpus misalignment:";
        for (const auto& id : missing) msg += " missing " + id;
        for (const auto& id : extra) msg += " extra " + id;
        auto offenders = missing;
        offenders.insert(offenders.end(), extra.begin(), extra.end());
        throw AlignmentError(msg, offenders);
    }

    EmbeddingMatrix out;
    out.dim = m.dim;
    out.review_ids = order;
    out.data.resize(order.size() * m.dim);
    out.flagged.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t src = index.at(order[i]);
        std::copy(m.row(src), m.row(src) + m.dim, out.row(i));
        out.flagged[i] = m.flagged[src];
    }
    return out;
}

inline EmbeddingMatrix load_embeddings(const std::string& path, const std::vector<std::string>& corpus_order) {
    return align_embeddings(read_embeddings(path), corpus_order);
}

inline EmbeddingMatrix load_embeddings(const std::string& path, const Corpus& corpus) {
    std::vector<std::string> order;
    order.reserve(corpus.size());
    for (const auto& r : corpus.records) order.push_back(r.review_id);
    return load_embeddings(path, order);
}

} // namespace emotopic
