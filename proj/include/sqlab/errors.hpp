#pragma once

#include <stdexcept>
#include <string>

namespace sqlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// A query, sample, or MQ budget ran out.
struct BudgetExhausted : Error {
    using Error::Error;
};

// Malformed query: phi out of [0,1], permutation with a fixed point, etc.
struct QueryError : Error {
    using Error::Error;
};

// A learner or refuter broke its declared contract.
struct ContractViolation : Error {
    using Error::Error;
};

// Invalid experiment configuration; message names the violated predicate.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace sqlab
