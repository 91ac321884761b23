#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbgraph {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map it to a stable, machine-readable kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_positive_definite"; }
};

class UnsupportedSize : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_size"; }
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "budget_exceeded"; }
};

class DegenerateTrace : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_trace"; }
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_fit"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

/// A per-column chain failed inside the worker pool.
class ColumnFailure : public Error {
 public:
  ColumnFailure(std::size_t column, const std::string& what)
      : Error("column " + std::to_string(column) + ": " + what), column_(column) {}
  const char* kind() const noexcept override { return "column_failure"; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace qbgraph
