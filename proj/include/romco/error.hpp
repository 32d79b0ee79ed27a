#pragma once

#include <stdexcept>
#include <string>

namespace romco {

/// Malformed input relative to the model shape (bad task id, dimension
/// mismatch, duplicate task in a round, non-finite matrix entries).
class StructuralError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Out-of-domain hyperparameter or operator argument.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Dataset file could not be read or failed validation.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (bad flags, bad grids, unwritable output).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The learner state became non-finite.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace romco
