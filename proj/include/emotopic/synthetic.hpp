#pragma once

// Planted-topic review generator used by the demo corpus and the test suites.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "emotion.hpp"
#include "hash.hpp"

namespace emotopic::synthetic {

// Small portable generator; std distributions differ across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() { return state_ = splitmix64(state_); }
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    template <class C>
    const auto& pick(const C& c) { return c[below(c.size())]; }

private:
    std::uint64_t state_;
};

// Pronounceable pseudo-word for (topic, slot). Never ends in 's' so the
// plural rule of the lemmatizer leaves it alone.
inline std::string pseudo_word(std::uint64_t key) {
    static constexpr std::array<std::string_view, 14> onset = {"b", "d", "f", "g", "k", "l", "m",
                                                               "n", "p", "r", "t", "v", "z", "br"};
    static constexpr std::array<std::string_view, 5> vowel = {"a", "e", "i", "o", "u"};
    static constexpr std::array<std::string_view, 5> coda = {"n", "r", "l", "x", "m"};
    std::uint64_t h = splitmix64(key);
    std::string w;
    for (int s = 0; s < 3; ++s) {
        w += onset[h % onset.size()];
        h /= onset.size();
        w += vowel[h % vowel.size()];
        h /= vowel.size();
    }
    w += coda[h % coda.size()];
    return w;
}

inline const std::vector<std::string>& background_words() {
    static const std::vector<std::string> w = {
        "phone",  "day",    "time",    "week",   "morning", "evening", "version", "screen", "button", "doctor",
        "family", "month",  "year",    "night",  "result",  "number",  "option",  "feature", "setting", "review"};
    return w;
}

inline const std::vector<std::string>& filler_stopwords() {
    static const std::vector<std::string> w = {"the", "and", "i", "it", "is", "to", "a", "my", "this",
                                               "of",  "for", "with", "but", "was", "on", "in", "that", "very"};
    return w;
}

// Keywords per category, consistent with data/emotion_keywords.tsv.
inline const std::vector<std::pair<std::string_view, std::string_view>>& emotion_words() {
    static const std::vector<std::pair<std::string_view, std::string_view>> w = {
        {"admiration", "amazing"},      {"admiration", "awesome"},    {"amusement", "funny"},
        {"anger", "angry"},             {"anger", "furious"},         {"annoyance", "annoying"},
        {"annoyance", "frustrating"},   {"approval", "recommend"},    {"caring", "care"},
        {"confusion", "confusing"},     {"curiosity", "curious"},     {"desire", "wish"},
        {"disappointment", "disappointed"}, {"disapproval", "useless"}, {"disapproval", "terrible"},
        {"disgust", "disgusting"},      {"embarrassment", "embarrassing"}, {"excitement", "excited"},
        {"fear", "scared"},             {"gratitude", "thank"},       {"gratitude", "grateful"},
        {"grief", "grief"},             {"joy", "happy"},             {"love", "love"},
        {"nervousness", "worried"},     {"optimism", "hopeful"},      {"pride", "proud"},
        {"relief", "relieved"},         {"remorse", "sorry"},         {"sadness", "sad"},
        {"surprise", "surprised"}};
    return w;
}

inline std::vector<std::string> words_for(std::string_view category) {
    std::vector<std::string> out;
    for (const auto& [c, w] : emotion_words())
        if (c == category) out.emplace_back(w);
    return out;
}

// Emotion profile cycled over topics: each topic favours two categories.
inline const std::vector<std::array<std::string_view, 2>>& emotion_profiles() {
    static const std::vector<std::array<std::string_view, 2>> p = {
        {"gratitude", "love"},     {"annoyance", "anger"},         {"disappointment", "sadness"},
        {"admiration", "joy"},     {"confusion", "nervousness"},   {"approval", "optimism"},
        {"disapproval", "annoyance"}, {"relief", "caring"},        {"excitement", "surprise"},
        {"fear", "nervousness"}};
    return p;
}

struct SyntheticSpec {
    std::size_t n_docs = 200;
    std::size_t n_topics = 8;
    std::uint64_t seed = 7;
    std::size_t words_per_topic = 10;
    std::size_t min_len = 30;
    std::size_t max_len = 45;
    double topic_share = 0.45;
    double background_share = 0.2;
    double emotion_rate = 0.85;  // probability a review carries emotion keywords
    std::string language = "en";
};

struct SyntheticCorpus {
    Corpus corpus;
    std::vector<int> planted_topic;  // per record
    std::vector<std::vector<std::string>> topic_vocabulary;
};

inline std::vector<std::vector<std::string>> planted_vocabulary(std::size_t n_topics, std::size_t words_per_topic) {
    std::vector<std::vector<std::string>> vocab(n_topics);
    std::set<std::string> used;
    std::uint64_t key = 0x5eed;
    for (auto& v : vocab)
        while (v.size() < words_per_topic) {
            auto w = pseudo_word(key++);
            if (used.insert(w).second) v.push_back(std::move(w));
        }
    return vocab;
}

inline SyntheticCorpus generate(const SyntheticSpec& spec) {
    SyntheticCorpus out;
    out.topic_vocabulary = planted_vocabulary(spec.n_topics, spec.words_per_topic);
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n_docs; ++i) {
        const std::size_t topic = i % spec.n_topics;
        const auto& vocab = out.topic_vocabulary[topic];
        const auto& profile = emotion_profiles()[topic % emotion_profiles().size()];
        const std::size_t len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);

        std::vector<std::string> words;
        for (std::size_t k = 0; k < len; ++k) {
            const double u = rng.uniform();
            if (u < spec.topic_share)
                words.push_back(rng.pick(vocab));
            else if (u < spec.topic_share + spec.background_share)
                words.push_back(rng.pick(background_words()));
            else
                words.push_back(rng.pick(filler_stopwords()));
        }
        int rating = 3;
        if (rng.uniform() < spec.emotion_rate) {
            const auto category = rng.uniform() < 0.8 ? profile[rng.below(2)]
                                                      : kEmotionCategories[rng.below(kNumEmotions - 1)];
            auto kw = words_for(category);
            if (!kw.empty()) {
                const std::size_t count = 1 + rng.below(2);
                for (std::size_t k = 0; k < count; ++k) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size())), rng.pick(kw));
            }
            const std::string_view c = category;
            const bool negative = c == "annoyance" || c == "anger" || c == "disappointment" || c == "sadness" ||
                                  c == "disapproval" || c == "fear" || c == "nervousness" || c == "confusion";
            rating = negative ? 1 + static_cast<int>(rng.below(2)) : 4 + static_cast<int>(rng.below(2));
        }
        ReviewRecord r;
        r.app_id = "app" + std::to_string(1 + topic % 7);
        r.review_id = "r" + std::to_string(100000 + i);
        r.title = vocab[rng.below(vocab.size())] + " " + rng.pick(background_words());
        std::string body;
        for (const auto& w : words) body += (body.empty() ? "" : " ") + w;
        r.body = body + ".";
        r.rating = rating;
        r.language = spec.language;
        r.country = "us";
        const std::size_t month = 1 + rng.below(12), day = 1 + rng.below(28);
        r.date = "2023-" + std::string(month < 10 ? "0" : "") + std::to_string(month) + "-" +
                 std::string(day < 10 ? "0" : "") + std::to_string(day);
        out.corpus.records.push_back(std::move(r));
        out.planted_topic.push_back(static_cast<int>(topic));
    }
    out.corpus.provenance = "synthetic(seed=" + std::to_string(spec.seed) + ", topics=" + std::to_string(spec.n_topics) + ")";
    return out;
}

} // namespace emotopic::synthetic
