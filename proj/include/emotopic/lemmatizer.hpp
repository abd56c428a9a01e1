#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "error.hpp"
#include "tsv.hpp"

namespace emotopic {

// English lookup lemmatizer with a small set of inflectional fallback rules.
// The lookup table (word \t lemma) covers irregular and derivational forms;
// regular plurals are handled by rule.
class Lemmatizer {
public:
    Lemmatizer() = default;

    static Lemmatizer from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open lemma table: " + path);
        Lemmatizer lem;
        std::string line;
        std::size_t lineno = 0;
        while (tsv::read_line(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto f = tsv::split(line);
            if (f.size() != 2 || f[0].empty() || f[1].empty())
                throw ParseError("lemma table: expected 'word<TAB>lemma'", lineno);
            lem.add(f[0], f[1]);
        }
        return lem;
    }

    void add(std::string word, std::string lemma) { table_[std::move(word)] = std::move(lemma); }
    std::size_t table_size() const noexcept { return table_.size(); }

    std::string lemma(std::string_view word) const {
        if (auto it = table_.find(std::string(word)); it != table_.end()) return it->second;
        std::string stem = apply_rules(word);
        if (auto it = table_.find(stem); it != table_.end()) return it->second;
        return stem;
    }

private:
    static bool ends_with(std::string_view s, std::string_view suffix) {
        return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
    }

    static std::string apply_rules(std::string_view w) {
        if (w.size() > 4 && ends_with(w, "ies")) return std::string(w.substr(0, w.size() - 3)) + "y";
        if (ends_with(w, "sses")) return std::string(w.substr(0, w.size() - 2));
        if (w.size() > 4 && (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "zes")))
            return std::string(w.substr(0, w.size() - 2));
        if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") &&
            !ends_with(w, "ous"))
            return std::string(w.substr(0, w.size() - 1));
        return std::string(w);
    }

    std::unordered_map<std::string, std::string> table_;
};

} // namespace emotopic
