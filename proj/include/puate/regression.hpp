#pragma once

#include <vector>

#include "puate/mathutil.hpp"

namespace puate {

// Covariate matrix with an intercept column prepended by the library. Callers
// always pass raw covariates; the intercept is never supplied by them.
class DesignMatrix {
 public:
  // Prepends a column of ones to `raw` (n x p) and validates finiteness.
  static DesignMatrix from_raw(const Mat& raw);

  // Like from_raw, but first applies a polynomial feature map of the given
  // degree (powers x, x^2, ..., x^degree per column; pairwise products when
  // `interactions` is set). degree must be in [1, 3].
  static DesignMatrix from_raw_poly(const Mat& raw, int degree,
                                    bool interactions = false);

  // Expanded raw features for a polynomial map (no intercept column).
  static Mat poly_expand(const Mat& raw, int degree, bool interactions);

  const Mat& values() const { return x_; }
  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index cols() const { return x_.cols(); }

 private:
  explicit DesignMatrix(Mat x) : x_(std::move(x)) {}
  Mat x_;
};

struct LinearModel {
  Vec coef;  // length p+1, intercept first
};

struct LogisticModel {
  Vec coef;  // length p+1, intercept first
  bool converged = false;
  bool separation = false;
  int iterations = 0;
};

// Ridge-penalized least squares; the intercept is not penalized. With
// ridge = 0 a rank-deficient design raises SingularDesign.
LinearModel fit_ols(const DesignMatrix& X, const Vec& y, double ridge = 0.0);

// Binary logistic regression by iteratively reweighted least squares with
// step halving. Stops when the score norm ||X'(y - p)||_inf falls below tol.
// When the coefficients run past the separation cap the last iterate is
// returned with converged = false and separation = true.
LogisticModel fit_logistic(const DesignMatrix& X, const std::vector<int>& labels,
                           int max_iter = 100, double tol = 1e-8);

Vec predict_mean(const LinearModel& model, const DesignMatrix& X);

// sigmoid(X beta), clipped into [clip_eps, 1 - clip_eps]. clip_eps must lie
// in [0, 0.5).
Vec predict_proba(const LogisticModel& model, const DesignMatrix& X,
                  double clip_eps);

// Single-row variants used by per-sample evaluation paths. `features` holds
// the raw feature vector (no intercept entry).
double predict_mean_at(const LinearModel& model, const Vec& features);
double predict_proba_at(const LogisticModel& model, const Vec& features,
                        double clip_eps);

// Default probability floor; keeps inverse weights bounded, mirroring the
// common-support constant in the identification assumptions.
inline constexpr double kDefaultClipEps = 1e-3;

// IRLS aborts once ||beta||_inf exceeds this; fitted probabilities are flat
// past that point.
inline constexpr double kSeparationCap = 30.0;

}  // namespace puate
