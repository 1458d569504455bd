#pragma once

#include <stdexcept>
#include <string>

namespace blip {

// Base for every error raised by the library. Subclasses mirror the error
// categories of the individual operations so callers can map them onto exit
// codes or retry policies.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t time_index)
      : Error(what), time_index_(time_index) {}
  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::size_t time_index_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class StagnationError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class DegenerateSamplingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace blip
