#pragma once

#include <stdexcept>
#include <string>

namespace wbdbn {

// Root of every error raised by the library. The CLI maps UsageError to exit
// status 2 and every other Error to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numeric argument outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Inconsistent model: bad scopes, unnormalized CPDs, illegal structure.
class ModelError : public Error {
public:
    using Error::Error;
};

// The caller asked for something that makes no sense for the given inputs.
class UsageError : public Error {
public:
    using Error::Error;
};

// Evidence with zero probability under the model.
class DegenerateEvidence : public Error {
public:
    using Error::Error;
};

// Malformed input data (CSV rows, questionnaire values, JSON documents).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A statistic that is not defined for the given samples.
class UndefinedStatistic : public Error {
public:
    using Error::Error;
};

} // namespace wbdbn
