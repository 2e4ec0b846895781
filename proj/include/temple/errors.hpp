#ifndef TEMPLE_ERRORS_HPP_
#define TEMPLE_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace temple {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A state quantity left its admissible domain (phi outside (0,1), J <= 0, ...).
class DomainError : public Error {
 public:
  DomainError(std::string field, double value, const std::string& what)
      : Error(what), field_(std::move(field)), value_(value) {}
  const std::string& field() const { return field_; }
  double value() const { return value_; }

 private:
  std::string field_;
  double value_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the time loop; carries the step index where it happened.
class SolverError : public Error {
 public:
  SolverError(long step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_ = 0;
};

}  // namespace temple

#endif  // TEMPLE_ERRORS_HPP_
