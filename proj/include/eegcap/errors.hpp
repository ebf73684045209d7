#pragma once

#include <stdexcept>
#include <string>

namespace eegcap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: dimension mismatch, out-of-range parameter, empty input.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be positive definite failed the pivot check.
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

/// Special-function argument outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Linear system could not be solved (singular normal equations).
class SolveError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class FileError : public Error {
 public:
  FileError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Configuration problem: malformed JSON, unknown key, failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eegcap
