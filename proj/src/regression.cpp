#include "puate/regression.hpp"

#include <Eigen/QR>
#include <cmath>

#include "puate/errors.hpp"

namespace puate {

DesignMatrix DesignMatrix::from_raw(const Mat& raw) {
  if (!raw.allFinite()) {
    throw InvalidInput("design matrix: non-finite covariate value");
  }
  Mat x(raw.rows(), raw.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(raw.cols()) = raw;
  return DesignMatrix(std::move(x));
}

Mat DesignMatrix::poly_expand(const Mat& raw, int degree, bool interactions) {
  if (degree < 1 || degree > 3) {
    throw InvalidInput("poly_expand: degree must be in [1, 3]");
  }
  const Eigen::Index n = raw.rows();
  const Eigen::Index p = raw.cols();
  Eigen::Index cols = p * degree;
  if (interactions) cols += p * (p - 1) / 2;
  Mat out(n, cols);
  Eigen::Index c = 0;
  for (int d = 1; d <= degree; ++d) {
    for (Eigen::Index j = 0; j < p; ++j) {
      out.col(c++) = raw.col(j).array().pow(d);
    }
  }
  if (interactions) {
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index k = j + 1; k < p; ++k) {
        out.col(c++) = raw.col(j).array() * raw.col(k).array();
      }
    }
  }
  return out;
}

DesignMatrix DesignMatrix::from_raw_poly(const Mat& raw, int degree,
                                         bool interactions) {
  return from_raw(poly_expand(raw, degree, interactions));
}

LinearModel fit_ols(const DesignMatrix& X, const Vec& y, double ridge) {
  const Mat& x = X.values();
  if (y.size() != x.rows()) {
    throw InvalidInput("fit_ols: y length does not match design rows");
  }
  if (!y.allFinite()) {
    throw InvalidInput("fit_ols: non-finite response value");
  }
  if (ridge < 0.0) {
    throw InvalidInput("fit_ols: ridge must be nonnegative");
  }

  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Mat> qr(x);
    if (qr.rank() < x.cols()) {
      throw SingularDesign("fit_ols: rank-deficient design with ridge = 0");
    }
    return LinearModel{qr.solve(y)};
  }

  Mat gram = x.transpose() * x;
  for (Eigen::Index j = 1; j < gram.cols(); ++j) {
    gram(j, j) += ridge;  // intercept unpenalized
  }
  Eigen::LDLT<Mat> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    throw SingularDesign("fit_ols: penalized normal equations not solvable");
  }
  return LinearModel{ldlt.solve(x.transpose() * y)};
}

namespace {

double log_likelihood(const Mat& x, const std::vector<int>& labels,
                      const Vec& beta) {
  const Vec eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // y*eta - log(1 + exp(eta)), stable in both tails
    ll += labels[static_cast<std::size_t>(i)] * eta[i] - softplus(eta[i]);
  }
  return ll;
}

}  // namespace

LogisticModel fit_logistic(const DesignMatrix& X, const std::vector<int>& labels,
                           int max_iter, double tol) {
  const Mat& x = X.values();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidInput("fit_logistic: label length does not match design rows");
  }
  if (max_iter < 1 || tol <= 0.0) {
    throw InvalidInput("fit_logistic: max_iter >= 1 and tol > 0 required");
  }
  long positives = 0;
  for (int v : labels) {
    if (v != 0 && v != 1) {
      throw InvalidInput("fit_logistic: labels must be 0 or 1");
    }
    positives += v;
  }
  if (positives == 0) throw NoPositives("fit_logistic: no positive labels");
  if (positives == n) throw NoNegatives("fit_logistic: no negative labels");

  LogisticModel model;
  model.coef = Vec::Zero(p);
  double ll = log_likelihood(x, labels, model.coef);

  Vec ylab(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ylab[i] = labels[static_cast<std::size_t>(i)];
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    model.iterations = iter + 1;

    const Vec eta = x * model.coef;
    Vec prob(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
    }
    const Vec score = x.transpose() * (ylab - prob);
    if (score.lpNorm<Eigen::Infinity>() <= tol) {
      model.converged = true;
      return model;
    }

    const Mat xtwx = x.transpose() * w.asDiagonal() * x;
    Eigen::LDLT<Mat> ldlt(xtwx);
    const Vec direction = ldlt.solve(score);
    if (!direction.allFinite()) {
      throw SingularDesign("fit_logistic: weighted normal equations singular");
    }

    // Rounding can shave an ulp off a converged log-likelihood; only treat
    // decreases beyond that as real.
    const double floor_ll = ll - 1e-10 * (std::fabs(ll) + 1.0);
    Vec proposal = model.coef + direction;
    double ll_new = log_likelihood(x, labels, proposal);
    for (int halving = 0; halving < 30 && !(ll_new >= floor_ll); ++halving) {
      proposal = 0.5 * (model.coef + proposal);
      ll_new = log_likelihood(x, labels, proposal);
    }

    model.coef = proposal;
    ll = ll_new;

    if (model.coef.lpNorm<Eigen::Infinity>() > kSeparationCap) {
      model.separation = true;
      model.converged = false;
      return model;
    }
  }

  model.converged = false;
  return model;
}

Vec predict_mean(const LinearModel& model, const DesignMatrix& X) {
  if (model.coef.size() != X.cols()) {
    throw InvalidInput("predict_mean: coefficient/design dimension mismatch");
  }
  return X.values() * model.coef;
}

Vec predict_proba(const LogisticModel& model, const DesignMatrix& X,
                  double clip_eps) {
  if (model.coef.size() != X.cols()) {
    throw InvalidInput("predict_proba: coefficient/design dimension mismatch");
  }
  if (clip_eps < 0.0 || clip_eps >= 0.5) {
    throw InvalidInput("predict_proba: clip_eps must lie in [0, 0.5)");
  }
  Vec out = X.values() * model.coef;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = clamp_prob(sigmoid(out[i]), clip_eps);
  }
  return out;
}

double predict_mean_at(const LinearModel& model, const Vec& features) {
  if (model.coef.size() != features.size() + 1) {
    throw InvalidInput("predict_mean_at: feature dimension mismatch");
  }
  return model.coef[0] + model.coef.tail(features.size()).dot(features);
}

double predict_proba_at(const LogisticModel& model, const Vec& features,
                        double clip_eps) {
  if (model.coef.size() != features.size() + 1) {
    throw InvalidInput("predict_proba_at: feature dimension mismatch");
  }
  const double eta =
      model.coef[0] + model.coef.tail(features.size()).dot(features);
  return clamp_prob(sigmoid(eta), clip_eps);
}

}  // namespace puate
