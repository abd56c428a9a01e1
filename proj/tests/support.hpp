#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <emotopic/corpus.hpp>
#include <emotopic/diag.hpp>

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(EMOTOPIC_DATA_DIR) + "/" + name; }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("emotopic-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline emotopic::ReviewRecord record(std::string id, std::string body, std::string title = "t",
                                     std::string language = "en") {
    emotopic::ReviewRecord r;
    r.app_id = "app";
    r.review_id = std::move(id);
    r.title = std::move(title);
    r.body = std::move(body);
    r.rating = 4;
    r.language = std::move(language);
    r.country = "us";
    r.date = "2023-01-01";
    return r;
}

inline emotopic::TokenizedDoc doc(std::string id, std::vector<std::string> tokens) {
    emotopic::TokenizedDoc d;
    d.review_id = std::move(id);
    d.raw_tokens = tokens;
    d.model_tokens = std::move(tokens);
    d.flagged = d.model_tokens.empty();
    return d;
}

// Swallows library warnings for the lifetime of the object.
struct QuietWarnings {
    emotopic::diag::ScopedSink sink{[](const std::string&) {}};
};

} // namespace testing_support

namespace testing_support {
inline std::string fixture_path(const std::string& name) { return std::string(EMOTOPIC_FIXTURE_DIR) + "/" + name; }
} // namespace testing_support
