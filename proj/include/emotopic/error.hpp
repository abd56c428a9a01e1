#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emotopic {

// Base of all library errors. Callers that only need a message can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input record. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::string raw = {})
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line), raw_(std::move(raw)) {}

    std::size_t line() const noexcept { return line_; }
    // Offending payload, kept for schema-drift diagnosis.
    const std::string& raw() const noexcept { return raw_; }

private:
    std::size_t line_;
    std::string raw_;
};

// Duplicate identifiers and similar cross-record violations.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::vector<std::string> offenders = {})
        : Error(what), offenders_(std::move(offenders)) {}
    const std::vector<std::string>& offenders() const noexcept { return offenders_; }

private:
    std::vector<std::string> offenders_;
};

// Ids present on one side but not the other.
class AlignmentError : public IntegrityError {
public:
    using IntegrityError::IntegrityError;
};

// Value-level problems: NaN, out-of-range, malformed lexicon.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A pipeline stage was asked to run before its inputs exist.
class DependencyError : public Error {
public:
    using Error::Error;
};

// Network failure. `retryable()` is true for transport failures and 5xx/429.
class NetworkError : public Error {
public:
    NetworkError(const std::string& what, int status, bool retryable)
        : Error(what), status_(status), retryable_(retryable) {}
    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

} // namespace emotopic

namespace emotopic {

// c-TF-IDF requested with no non-outlier class.
class EmptyModelError : public Error {
public:
    using Error::Error;
};

} // namespace emotopic
