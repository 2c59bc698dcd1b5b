#pragma once

#include <stdexcept>
#include <string>

namespace nesc {

// Tensor shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke an operation's precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data (corpus, embeddings, labels) is malformed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training diverged (non-finite loss or gradient).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A persisted model file is truncated, corrupt, or of an unknown version.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace nesc
