#pragma once

#include <stdexcept>
#include <string>

namespace puate {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent inputs (dimension mismatch, non-finite values,
// out-of-range parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Normal equations are singular and no ridge penalty was requested.
class SingularDesign : public Error {
 public:
  using Error::Error;
};

// A classification fit received only positive labels.
class NoNegatives : public Error {
 public:
  using Error::Error;
};

// A classification fit or a labeled-sample average received no positives.
class NoPositives : public Error {
 public:
  using Error::Error;
};

// An empty dataset where at least one sample is required.
class NoData : public Error {
 public:
  using Error::Error;
};

// A cross-fitting training complement is missing one of the label classes.
class DegenerateFold : public Error {
 public:
  using Error::Error;
};

// CSV parse failure; carries 1-based row and column of the offending cell.
class CsvError : public Error {
 public:
  CsvError(const std::string& what, long row, long col)
      : Error(what + " (row " + std::to_string(row) + ", col " +
              std::to_string(col) + ")"),
        row(row),
        col(col) {}
  long row;
  long col;
};

// A value violates the declared column schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading or writing results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace puate
