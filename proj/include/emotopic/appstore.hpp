#pragma once

// App screening against the inclusion/exclusion rules and a client for the
// public App Store customer-review RSS feed. The HTTP transport is
// injectable; appstore_http.hpp provides the network-backed one.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "text.hpp"

namespace emotopic::appstore {

struct AppCandidate {
    std::string app_id;
    std::string name;
    int genre_id = 0;
    long long rating_count_global = 0;
    std::string description;
    std::string release_notes;
};

inline const std::vector<std::string>& default_wearable_keywords() {
    static const std::vector<std::string> kw = {"Apple Health", "Bluetooth", "Connect", "Device", "Record",
                                                "Sync",         "Watch",     "WiFi",    "iHealth"};
    return kw;
}

struct SelectionCriteria {
    std::vector<std::string> search_terms = {"blood pressure", "hypertension"};
    std::vector<int> excluded_genres = {6014};  // Games
    long long min_ratings = 100;
    std::vector<std::string> wearable_keywords = default_wearable_keywords();
    std::set<std::string> manual_confirmations;
};

enum class ExclusionReason { search_terms, ratings, genre, wearable };

inline const char* to_string(ExclusionReason r) {
    switch (r) {
    case ExclusionReason::search_terms: return "search_terms";
    case ExclusionReason::ratings: return "ratings";
    case ExclusionReason::genre: return "genre";
    case ExclusionReason::wearable: return "wearable";
    }
    return "?";
}

struct Exclusion {
    AppCandidate app;
    ExclusionReason reason;
};

struct ScreeningResult {
    std::vector<AppCandidate> included;
    std::vector<Exclusion> excluded;
};

namespace detail {
inline bool mentions_any(const AppCandidate& app, const std::vector<std::string>& keywords) {
    const std::string hay = text::to_lower_ascii(app.name + "\n" + app.description + "\n" + app.release_notes);
    return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
        return !k.empty() && hay.find(text::to_lower_ascii(k)) != std::string::npos;
    });
}
} // namespace detail

// Rules are checked in the order search terms, ratings, genre, wearables;
// the first failing rule is the recorded reason.
inline std::optional<ExclusionReason> first_failed_rule(const AppCandidate& app, const SelectionCriteria& c) {
    if (!detail::mentions_any(app, c.search_terms)) return ExclusionReason::search_terms;
    if (app.rating_count_global < c.min_ratings) return ExclusionReason::ratings;
    if (std::find(c.excluded_genres.begin(), c.excluded_genres.end(), app.genre_id) != c.excluded_genres.end())
        return ExclusionReason::genre;
    if (!detail::mentions_any(app, c.wearable_keywords) && !c.manual_confirmations.contains(app.app_id))
        return ExclusionReason::wearable;
    return std::nullopt;
}

inline ScreeningResult screen_apps(const std::vector<AppCandidate>& candidates, const SelectionCriteria& criteria) {
    if (criteria.min_ratings < 0) throw ConfigError("min_ratings must be >= 0");
    ScreeningResult out;
    for (const auto& app : candidates) {
        if (auto reason = first_failed_rule(app, criteria))
            out.excluded.push_back({app, *reason});
        else
            out.included.push_back(app);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transport

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Transport = std::function<HttpResponse(const std::string& url)>;

inline std::string review_feed_url(const std::string& app_id, const std::string& country, int page) {
    return "https://itunes.apple.com/" + text::to_lower_ascii(country) + "/rss/customerreviews/page=" +
           std::to_string(page) + "/id=" + app_id + "/sortby=mostrecent/json";
}

inline std::string lookup_url(const std::vector<std::string>& app_ids, const std::string& country) {
    std::string ids;
    for (const auto& id : app_ids) ids += (ids.empty() ? "" : ",") + id;
    return "https://itunes.apple.com/lookup?id=" + ids + "&country=" + text::to_lower_ascii(country);
}

// Caches successful responses on disk keyed by URL hash. Only 200 responses
// are stored, so failures are retried on the next run.
class CachedTransport {
public:
    CachedTransport(Transport inner, std::filesystem::path dir) : inner_(std::move(inner)), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    HttpResponse operator()(const std::string& url) {
        const auto path = dir_ / (hex64(fnv1a64(url)) + ".json");
        {
            std::lock_guard lock(mutex_);
            std::ifstream in(path, std::ios::binary);
            if (in) return {200, std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>())};
        }
        auto resp = inner_(url);
        if (resp.status == 200) {
            std::lock_guard lock(mutex_);
            std::ofstream out(path, std::ios::binary);
            out << resp.body;
        }
        return resp;
    }

private:
    Transport inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

// Enforces a minimum spacing between requests across threads.
class RateLimitedTransport {
public:
    RateLimitedTransport(Transport inner, std::chrono::milliseconds min_interval)
        : inner_(std::move(inner)), interval_(min_interval) {}

    HttpResponse operator()(const std::string& url) {
        {
            std::lock_guard lock(mutex_);
            auto now = std::chrono::steady_clock::now();
            if (now < next_) std::this_thread::sleep_until(next_);
            next_ = std::chrono::steady_clock::now() + interval_;
        }
        return inner_(url);
    }

private:
    Transport inner_;
    std::chrono::milliseconds interval_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_{};
};

// ---------------------------------------------------------------------------
// Feed parsing

namespace detail {
inline std::string label(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_object()) return {};
    auto l = it->find("label");
    return (l != it->end() && l->is_string()) ? l->get<std::string>() : std::string{};
}
} // namespace detail

// Parses one feed page. Entries without a rating (the app-metadata entry the
// feed used to prepend) are skipped. Structural surprises raise ParseError
// carrying the raw payload.
inline std::vector<ReviewRecord> parse_feed_page(const std::string& payload, const std::string& app_id,
                                                 const std::string& country, const std::string& language) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("feed: invalid JSON: ") + e.what(), 0, payload);
    }
    if (!j.is_object() || !j.contains("feed") || !j["feed"].is_object())
        throw ParseError("feed: missing 'feed' object", 0, payload);
    const auto& feed = j["feed"];
    auto it = feed.find("entry");
    if (it == feed.end()) return {};

    std::vector<nlohmann::json> entries;
    if (it->is_array())
        entries.assign(it->begin(), it->end());
    else if (it->is_object())
        entries.push_back(*it);
    else
        throw ParseError("feed: 'entry' is neither array nor object", 0, payload);

    std::vector<ReviewRecord> out;
    for (const auto& e : entries) {
        if (!e.is_object()) throw ParseError("feed: entry is not an object", 0, payload);
        const auto rating = detail::label(e, "im:rating");
        if (rating.empty()) continue;
        ReviewRecord r;
        r.app_id = app_id;
        r.review_id = detail::label(e, "id");
        r.title = detail::label(e, "title");
        r.body = detail::label(e, "content");
        r.language = language;
        r.country = text::to_lower_ascii(country);
        r.date = detail::label(e, "updated").substr(0, 10);
        try {
            r.rating = std::stoi(rating);
        } catch (const std::exception&) {
            throw ParseError("feed: non-numeric rating '" + rating + "'", 0, payload);
        }
        if (r.review_id.empty()) throw ParseError("feed: entry without id", 0, payload);
        try {
            emotopic::detail::validate_record(r, 0);
        } catch (const ParseError& err) {
            throw ParseError(std::string("feed: ") + err.what(), 0, payload);
        }
        out.push_back(std::move(r));
    }
    return out;
}

struct FetchOptions {
    int max_pages = 10;
    std::string language = "und";  // the feed carries no language tag
};

// Pages until max_pages or an empty page. Duplicate ids across pages are
// dropped, keeping the first occurrence.
inline std::vector<ReviewRecord> fetch_reviews(const Transport& transport, const std::string& app_id,
                                               const std::string& country, const FetchOptions& opts = {}) {
    std::vector<ReviewRecord> out;
    std::unordered_set<std::string> seen;
    for (int page = 1; page <= opts.max_pages; ++page) {
        const auto url = review_feed_url(app_id, country, page);
        auto resp = transport(url);
        if (resp.status != 200) {
            bool retryable = resp.status == 0 || resp.status == 429 || resp.status >= 500;
            throw NetworkError("GET " + url + " failed with status " + std::to_string(resp.status), resp.status,
                               retryable);
        }
        auto records = parse_feed_page(resp.body, app_id, country, opts.language);
        if (records.empty()) break;
        for (auto& r : records)
            if (seen.insert(r.review_id).second) out.push_back(std::move(r));
    }
    return out;
}

// Per-country outcome of a multi-country fetch; coverage of the public feed
// differs by storefront, so failures are reported rather than fatal.
struct CountryFetchStatus {
    std::string country;
    std::size_t reviews = 0;
    std::string error;  // empty on success
};

inline std::vector<ReviewRecord> fetch_reviews_multi(const Transport& transport, const std::string& app_id,
                                                     const std::vector<std::string>& countries,
                                                     const FetchOptions& opts,
                                                     std::vector<CountryFetchStatus>& status) {
    std::vector<ReviewRecord> out;
    std::unordered_set<std::string> seen;
    for (const auto& c : countries) {
        CountryFetchStatus st{c, 0, {}};
        try {
            for (auto& r : fetch_reviews(transport, app_id, c, opts))
                if (seen.insert(r.review_id).second) {
                    out.push_back(std::move(r));
                    ++st.reviews;
                }
        } catch (const Error& e) {
            st.error = e.what();
        }
        status.push_back(std::move(st));
    }
    return out;
}

// Parses an iTunes lookup/search response into candidates.
inline std::vector<AppCandidate> parse_lookup_results(const std::string& payload) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("lookup: invalid JSON: ") + e.what(), 0, payload);
    }
    if (!j.is_object() || !j.contains("results") || !j["results"].is_array())
        throw ParseError("lookup: missing 'results' array", 0, payload);
    std::vector<AppCandidate> out;
    for (const auto& r : j["results"]) {
        if (!r.is_object() || !r.contains("trackId")) continue;
        AppCandidate a;
        a.app_id = r["trackId"].is_number() ? std::to_string(r["trackId"].get<long long>())
                                            : r["trackId"].get<std::string>();
        a.name = r.value("trackName", "");
        a.genre_id = r.value("primaryGenreId", 0);
        a.rating_count_global = r.value("userRatingCount", 0LL);
        a.description = r.value("description", "");
        a.release_notes = r.value("releaseNotes", "");
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace emotopic::appstore
