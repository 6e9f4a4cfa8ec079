#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad scenario/config input. `where` names the section/field or file location.
class ConfigError : public Error {
public:
  ConfigError(const std::string& where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

/// Map content violates an UrbanMap invariant (self-intersection, bounds, ...).
class MapValidationError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class SamplingError : public Error {
public:
  using Error::Error;
};

class DeploymentError : public Error {
public:
  using Error::Error;
};

} // namespace d2d
