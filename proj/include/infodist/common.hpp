#pragma once

// Shared plumbing for the infodist library: error taxonomy, numeric constants,
// compensated summation, and closed-form normal-law helpers used everywhere.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace infodist {

enum class ErrorCode {
  InvalidDensity,
  GridTooCoarse,
  InsufficientCoverage,
  GridMismatch,
  DegenerateVariance,
  NonsmoothDensity,
  UseLogScale,
  NoConvergence,
  QuadratureError,
  AliasingDetected,
  DomainError,
  ConstructionError,
  NumericalError,
  InvalidConfig,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidDensity:       return "InvalidDensity";
    case ErrorCode::GridTooCoarse:        return "GridTooCoarse";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::GridMismatch:         return "GridMismatch";
    case ErrorCode::DegenerateVariance:   return "DegenerateVariance";
    case ErrorCode::NonsmoothDensity:     return "NonsmoothDensity";
    case ErrorCode::UseLogScale:          return "UseLogScale";
    case ErrorCode::NoConvergence:        return "NoConvergence";
    case ErrorCode::QuadratureError:      return "QuadratureError";
    case ErrorCode::AliasingDetected:     return "AliasingDetected";
    case ErrorCode::DomainError:          return "DomainError";
    case ErrorCode::ConstructionError:    return "ConstructionError";
    case ErrorCode::NumericalError:       return "NumericalError";
    case ErrorCode::InvalidConfig:        return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;
// log p contributions are dropped below this density level (entropy integrals).
inline constexpr double kEntropyFloor = 1e-300;
// Fisher integrands are clamped below this density level; clamped mass is reported.
inline constexpr double kFisherFloor = 1e-250;

// Compensated (Kahan) left-to-right accumulator. The counterexample pipeline
// resolves relative-entropy values around 1e-13 out of O(1) entropies, which a
// naive running sum over ~2e4 terms cannot do reliably in double precision.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Trapezoid rule over uniformly spaced samples (step h), compensated.
inline double trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  KahanSum s;
  s.add(0.5 * v.front());
  for (std::size_t j = 1; j + 1 < v.size(); ++j) s.add(v[j]);
  s.add(0.5 * v.back());
  return h * s.value();
}

inline double normal_pdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * kSqrt2Pi);
}

// d/dx of the normal density.
inline double normal_pdf_deriv(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -z / sd * normal_pdf(x, mean, sd);
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

inline bool nearly_equal(double a, double b, double rel, double abs) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace infodist
