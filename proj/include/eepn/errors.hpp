// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace eepn {

/// Invalid argument to an operation (out-of-range value, length mismatch, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent processing or run configuration.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Estimation failed on the given data (degenerate block, rank-deficient fit).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filter design target cannot be realized with the requested tap count.
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what)
{
    if (!cond) {
        throw ParameterError(what);
    }
}
} // namespace detail

} // namespace eepn
