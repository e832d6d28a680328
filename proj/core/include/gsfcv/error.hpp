#pragma once

#include <stdexcept>
#include <string>

namespace gsfcv {

// Root of every error the library throws. Callers that only care about
// "something numerical went wrong" can catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on different gauges or grids.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class InvertibilityError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Bad argument or precondition violation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

// A closed-form fit whose linear system is singular.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// A derivative order or system feature the object does not provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

// Integrator failures carry the time at which they happened.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsfcv
