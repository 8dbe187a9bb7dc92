#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The drift matrix is not Hurwitz, so no steady state exists.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// A linear solve was singular or its residual too large.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

class FitQualityError : public Error {
 public:
  FitQualityError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid configuration and input files.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field = {}, int line = 0)
      : Error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace optomech
