#pragma once

#include <cmath>

namespace pelp {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// softplus(x) = log(1 + e^x), overflow-safe on both tails
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// log sigma(x); finite for any finite x
inline double log_sigmoid(double x) { return -softplus(-x); }

// log(1 - sigma(x))
inline double log_one_minus_sigmoid(double x) { return -softplus(x); }

}  // namespace pelp
