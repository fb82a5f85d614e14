#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydroprice {

// Bad arguments, bad configuration, unusable parameters. The CLI maps these
// to exit code 1.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Anything wrong with the data itself. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecordError : public DataError {
 public:
  MalformedRecordError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class DataIntegrityError : public DataError {
 public:
  using DataError::DataError;
};

class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

// Design matrix is (numerically) rank deficient. `column` is the first column
// that lies in the span of the columns before it.
class CollinearityError : public DataError {
 public:
  CollinearityError(std::size_t column, const std::string& what)
      : DataError(what), column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class FitError : public DataError {
 public:
  using DataError::DataError;
};

class SolverError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace hydroprice
