#pragma once

#include <stdexcept>
#include <string>

namespace qualit {

// Bad caller input: missing paths, malformed records, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration or command-line usage.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A chat or embedding service failed after retries (or with a hard error).
class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& what, int attempts, int status = 0)
        : std::runtime_error(what), attempts_(attempts), status_(status) {}

    int attempts() const noexcept { return attempts_; }
    // Last HTTP status seen, 0 for transport-level failures.
    int status() const noexcept { return status_; }

private:
    int attempts_;
    int status_;
};

}  // namespace qualit
