#pragma once

#include <stdexcept>
#include <string>

namespace strichartz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// The inverse transform table's box discards more tail mass than allowed.
class BoxTooSmall : public Error {
public:
  BoxTooSmall(const std::string& what, double tail) : Error(what), tail_(tail) {}
  double tail() const noexcept { return tail_; }

private:
  double tail_;
};

/// A requested accuracy cannot be met; carries the bound that can be met.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double achievable)
      : Error(what), achievable_(achievable) {}
  double achievable() const noexcept { return achievable_; }

private:
  double achievable_;
};

/// An iterative solver hit its cap; carries its best estimate.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(what), best_(best_estimate) {}
  double best_estimate() const noexcept { return best_; }

private:
  double best_;
};

/// A periodic grid cannot represent a symbol without aliasing.
class GridTooCoarse : public Error {
public:
  GridTooCoarse(const std::string& what, int required_n) : Error(what), required_n_(required_n) {}
  int required_n() const noexcept { return required_n_; }

private:
  int required_n_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidParameter(what);
}

}  // namespace strichartz
