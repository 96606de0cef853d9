#pragma once

#include <string>

#include "puate/mathutil.hpp"

namespace puate {

// Point estimate with plug-in variance, normal-quantile confidence interval,
// and per-sample influence (or summand) values.
struct EstimateReport {
  std::string method;
  double tau_hat = 0.0;
  double var_hat = 0.0;  // estimate of the asymptotic variance V
  double se = 0.0;       // sqrt(var_hat / n_effective)
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  long n_effective = 0;
  long clip_count = 0;
  // Set when the interval has no asymptotic justification (plug-in values or
  // estimated inverse weights); such coverage is reported as-is.
  bool naive_ci = false;
  Vec influence;

  bool covers(double tau) const { return ci_lo <= tau && tau <= ci_hi; }
};

}  // namespace puate
