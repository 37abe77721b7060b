#pragma once

#include <stdexcept>
#include <string>

namespace dft {

// Base of every error raised by the library. The CLI maps these to exit
// code 1; usage errors are handled before any library call.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Violated call-site precondition (e.g. dimension mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace dft
