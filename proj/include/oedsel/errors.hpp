#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oedsel {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, model parameters or budgets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Index outside the dimension of the matrix or candidate set.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (factorization, degenerate blocks, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Conditioning block of a Schur complement stayed singular after jitter.
class DegenerateBlockError : public NumericalError {
 public:
  DegenerateBlockError(std::vector<std::size_t> indices)
      : NumericalError(describe(indices)), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  static std::string describe(const std::vector<std::size_t>& indices) {
    std::ostringstream os;
    os << "degenerate conditioning block on indices {";
    for (std::size_t i = 0; i < indices.size(); ++i) os << (i ? "," : "") << indices[i];
    os << "}";
    return os.str();
  }

  std::vector<std::size_t> indices_;
};

class InsufficientSamplesError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Observation or parameter outside the support of the model.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Every component of the prior-bank mixture assigns zero density to y.
class DegenerateMixtureError : public NumericalError {
 public:
  explicit DegenerateMixtureError(std::string what, std::int64_t sample_index = -1)
      : NumericalError(std::move(what)), sample_index_(sample_index) {}

  /// Joint-sample index that triggered the failure, or -1 when unknown.
  std::int64_t sample_index() const noexcept { return sample_index_; }

 private:
  std::int64_t sample_index_;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused because the subset count is too large.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(std::string what, double count) : Error(std::move(what)), count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A greedy selector failed part-way; carries the indices chosen before the failure.
class SelectionError : public NumericalError {
 public:
  SelectionError(const std::string& what, std::vector<std::size_t> partial)
      : NumericalError(what), partial_(std::move(partial)) {}

  const std::vector<std::size_t>& partial_design() const noexcept { return partial_; }

 private:
  std::vector<std::size_t> partial_;
};

}  // namespace oedsel
