#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace siwalk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input (dimension mismatch, bad weights, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A search or verification ran to completion without producing a certificate.
/// `detail()` carries the best/worst values found, for machine-readable reporting.
class SearchFailure : public Error {
 public:
  SearchFailure(const std::string& what, nlohmann::json detail)
      : Error(what), detail_(std::move(detail)) {}

  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  nlohmann::json detail_;
};

/// A constructed object failed one of its numerically checked properties.
class PropertyViolation : public Error {
 public:
  PropertyViolation(const std::string& property, const std::string& what)
      : Error(what), property_(property) {}

  const std::string& property() const noexcept { return property_; }

 private:
  std::string property_;
};

}  // namespace siwalk
