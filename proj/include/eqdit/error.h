// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_ERROR_H_
#define EQDIT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqdit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed structure or cache file. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedElementError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Coincident positions or zero displacement where a direction is required.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Input data that parses but cannot be used (nothing left to train on, no
// molecules to evaluate).
class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace eqdit

#endif  // EQDIT_ERROR_H_
