#pragma once

#include <stdexcept>
#include <string>

namespace spanie {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input files that cannot be parsed (JSON syntax, missing keys, wrong types).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad hyperparameters, dimension mismatches, paths.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Failures during optimisation, e.g. non-finite losses.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace spanie
