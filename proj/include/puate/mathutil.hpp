#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

namespace puate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

inline double clamp_prob(double p, double eps) {
  if (p < eps) return eps;
  if (p > 1.0 - eps) return 1.0 - eps;
  return p;
}

// Standard normal quantile (Acklam's rational approximation, |err| < 1.2e-9).
double normal_quantile(double p);

inline double z_for_level(double level) {
  return normal_quantile(0.5 + 0.5 * level);
}

// Sample mean and unbiased (n-1) variance.
double mean_of(const Vec& v);
double sample_variance(const Vec& v);

// Standardized third and fourth central moments.
double skewness(const Vec& v);
double excess_kurtosis(const Vec& v);

}  // namespace puate
