#pragma once

#include <stdexcept>
#include <string>

namespace finkario {

struct ProviderError : std::runtime_error {
    int attempts = 0;
    explicit ProviderError(const std::string& msg, int attempts_ = 0)
        : std::runtime_error(msg), attempts(attempts_) {}
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    std::string raw;
    explicit ParseError(const std::string& msg, std::string raw_ = {})
        : std::runtime_error(msg), raw(std::move(raw_)) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDocumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StalenessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace finkario
