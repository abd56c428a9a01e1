#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace emotopic::text {

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept as word
// characters, so non-ASCII letters never split a word.
inline bool is_word_byte(unsigned char c) noexcept { return c >= 0x80 || std::isalnum(c); }

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Lowercased maximal runs of word characters.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        while (i < s.size() && is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.push_back(to_lower_ascii(s.substr(start, i - start)));
    }
    return out;
}

// Whitespace-delimited token count; this is the review length measure.
inline std::size_t whitespace_word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

// Number grammar: digits, optionally followed by an ordinal suffix
// (1st, 22nd, 3rd, 4th) or a single exponent ("1e5"). Tokenization has
// already split on '.', ',' and '-'.
inline bool is_number(std::string_view tok) noexcept {
    std::size_t i = 0;
    while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) ++i;
    if (i == 0) return false;
    auto rest = tok.substr(i);
    if (rest.empty()) return true;
    if (rest == "st" || rest == "nd" || rest == "rd" || rest == "th") return true;
    if (rest.size() > 1 && rest[0] == 'e') {
        for (std::size_t j = 1; j < rest.size(); ++j)
            if (!std::isdigit(static_cast<unsigned char>(rest[j]))) return false;
        return true;
    }
    return false;
}

} // namespace emotopic::text
