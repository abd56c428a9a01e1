#pragma once

// Network-backed transport. Requires cpp-httplib built with OpenSSL
// (CPPHTTPLIB_OPENSSL_SUPPORT) and linking against OpenSSL.

#include <string>

#include <httplib.h>

#include "appstore.hpp"

namespace emotopic::appstore {

inline HttpResponse https_get(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_begin = url.find('/', host_begin);
    const std::string origin = url.substr(0, path_begin);
    const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path);
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
}

} // namespace emotopic::appstore
