#pragma once

#include <stdexcept>
#include <string>

namespace qd {

// Invalid arguments are reported with std::invalid_argument.

/// A configuration value (bounds, override, campaign field) is unusable.
class InvalidConfiguration : public std::runtime_error {
public:
    explicit InvalidConfiguration(const std::string& what) : std::runtime_error(what) {}
    InvalidConfiguration(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    /// Offending key, empty when the error is not tied to a single key.
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// An operation was invoked on an object that cannot serve it (e.g. selecting from an empty pool).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace qd
