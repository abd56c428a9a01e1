#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <utility>

namespace emotopic::diag {

using Sink = std::function<void(const std::string&)>;

inline Sink& sink() {
    static Sink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

inline void warn(const std::string& msg) {
    if (sink()) sink()(msg);
}

// Redirects warnings for the lifetime of the guard.
class ScopedSink {
public:
    explicit ScopedSink(Sink s) : previous_(std::exchange(sink(), std::move(s))) {}
    ~ScopedSink() { sink() = std::move(previous_); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

} // namespace emotopic::diag
