#pragma once

#include <stdexcept>
#include <string>

namespace meshtrap {

// Base for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments or out-of-domain inputs (CLI exit code 2).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// The escape-probability bound was asked for outside the hypothesis
// w_D < sqrt(m) - 1/(4 sqrt(m)); the bound is silent there, which callers
// must distinguish from "probability is low".
class HypothesisNotMet : public DomainError {
 public:
  explicit HypothesisNotMet(const std::string& what) : DomainError(what) {}
};

// Numerical failures (CLI exit code 3).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

class NoRootError : public NumericError {
 public:
  explicit NoRootError(const std::string& what) : NumericError(what) {}
};

class RankError : public NumericError {
 public:
  explicit RankError(const std::string& what) : NumericError(what) {}
};

class FactorError : public NumericError {
 public:
  explicit FactorError(const std::string& what) : NumericError(what) {}
};

class NoCrossingError : public NumericError {
 public:
  explicit NoCrossingError(const std::string& what) : NumericError(what) {}
};

}  // namespace meshtrap
