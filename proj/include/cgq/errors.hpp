#pragma once

#include <stdexcept>
#include <string>

namespace cgq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  DimensionMismatch(std::size_t expected, std::size_t got, const std::string& where)
      : Error(where + ": dimension mismatch (expected " + std::to_string(expected) +
              ", got " + std::to_string(got) + ")") {}
};

class NotHermitian : public Error {
public:
  explicit NotHermitian(double deviation)
      : Error("operator is not Hermitian (max |M - M^dagger| = " + std::to_string(deviation) +
              ")"),
        deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

private:
  double deviation_;
};

/// Raised when the constraint gradient is too small to define a Lagrange multiplier.
/// Carries both parts of the ratio so callers can decide whether the state sits at a
/// critical point of the constraint (zero numerator) or the constraint is inconsistent.
class MultiplierSingular : public Error {
public:
  MultiplierSingular(double numerator, double denominator)
      : Error("Lagrange multiplier is singular (numerator " + std::to_string(numerator) +
              ", |grad Phi|^2 " + std::to_string(denominator) + ")"),
        numerator_(numerator),
        denominator_(denominator) {}
  double numerator() const noexcept { return numerator_; }
  double denominator() const noexcept { return denominator_; }

private:
  double numerator_;
  double denominator_;
};

/// Non-finite state encountered while integrating; `time()` is where it happened.
class IntegrationError : public Error {
public:
  IntegrationError(double t, const std::string& what)
      : Error("integration failed at t = " + std::to_string(t) + ": " + what), time_(t) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace cgq
