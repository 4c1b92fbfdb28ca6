#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cw {

// Bad inputs: malformed files, schema violations, out-of-range parameters.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A rejected corpus/cache line. Carries the 1-based line number and the
// offending field so callers can point at the exact spot in the file.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Transport or backend failure (embedding provider, chat backend, logit
// provider). Retriable by the caller's policy; surfaced once retries are
// exhausted.
class ProviderError : public std::runtime_error {
public:
    explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cw
