#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdselector {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required column is missing or a schema is malformed.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::string column)
      : Error(message), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A cell could not be parsed. `row()` is the 0-based data row (header excluded).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row)
      : Error(message), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IncompatibleSchemaError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Cosine similarity with a zero-norm operand.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

class EmptyPoolError : public Error {
 public:
  using Error::Error;
};

/// AUC requested on labels that contain a single class.
class UndefinedAucError : public Error {
 public:
  using Error::Error;
};

/// The AUC evaluator failed during the alpha grid search.
class OracleError : public Error {
 public:
  OracleError(const std::string& message, double alpha)
      : Error(message), alpha_(alpha) {}
  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdselector
