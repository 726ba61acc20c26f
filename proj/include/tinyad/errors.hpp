#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tinyad {

// Root of every error thrown by the library. The CLI maps subclasses to exit
// codes: BudgetError -> 3, everything else derived from Error -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed model text. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Semantically invalid model (e.g. weight count mismatch). `layer` is the
// 0-based layer index, or -1 for model-level problems.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, long layer)
      : Error(what), layer_(layer) {}
  long layer() const { return layer_; }

 private:
  long layer_;
};

// I/O failure while streaming layers. `last_good` is the index of the last
// layer successfully yielded, or -1 if none was.
class StreamError : public Error {
 public:
  StreamError(const std::string& what, long last_good)
      : Error(what), last_good_(last_good) {}
  long last_good() const { return last_good_; }

 private:
  long last_good_;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, long layer, std::size_t live_bytes,
              std::size_t budget_bytes)
      : Error(what), layer_(layer), live_(live_bytes), budget_(budget_bytes) {}
  long layer() const { return layer_; }
  std::size_t live_bytes() const { return live_; }
  std::size_t budget_bytes() const { return budget_; }

 private:
  long layer_;
  std::size_t live_;
  std::size_t budget_;
};

class WindowError : public Error {
 public:
  using Error::Error;
};

class SilentWindowError : public Error {
 public:
  using Error::Error;
};

// CSV ingestion failure. `row` is the 1-based data row (header excluded).
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace tinyad
