#pragma once

#include <stdexcept>
#include <string>

namespace hord {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DeligneViolation : std::domain_error {
    using std::domain_error::domain_error;
};

struct CacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an admissible prime / exponent search exhausts its bound.
struct SearchExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hord
