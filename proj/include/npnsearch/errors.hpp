#pragma once

#include <stdexcept>
#include <string>

namespace npnsearch {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct DegenerateColumnError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct SimulationOverflowError : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct DenominatorError : Error { using Error::Error; };
struct EmptyAggregateError : Error { using Error::Error; };
struct EmptyResultError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct TimeoutError : Error { using Error::Error; };

}  // namespace npnsearch
