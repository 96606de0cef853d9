#include "puate/censoring.hpp"

#include <cmath>

#include "puate/errors.hpp"

namespace puate {

namespace {

EstimateReport finalize(std::string method, Vec values, double level,
                        long clip_count, bool naive_ci) {
  EstimateReport report;
  report.method = std::move(method);
  report.level = level;
  report.n_effective = values.size();
  report.clip_count = clip_count;
  report.naive_ci = naive_ci;
  report.tau_hat = mean_of(values);
  report.var_hat = sample_variance(values);
  report.se = std::sqrt(report.var_hat / static_cast<double>(report.n_effective));
  const double z = z_for_level(level);
  report.ci_lo = report.tau_hat - z * report.se;
  report.ci_hi = report.tau_hat + z * report.se;
  report.influence = std::move(values);
  return report;
}

void check_eval(const CensoringDataset& data, const CensNuisanceEval& eval) {
  const Eigen::Index n = data.size();
  if (eval.mu_t.size() != n || eval.nu.size() != n || eval.pi1.size() != n ||
      eval.g1.size() != n) {
    throw InvalidInput("censoring estimator: nuisance evaluation length mismatch");
  }
}

}  // namespace

double influence_censoring(int o, double y, double mu_t, double nu, double pi1,
                           double g1) {
  const double pi0 = 1.0 - pi1;
  const double g0 = 1.0 - g1;
  const double regression_part = mu_t - nu / g0 + (g1 / g0) * mu_t;
  if (o == 1) {
    const double resid = y - mu_t;
    return resid / pi1 + g1 * resid / (g0 * pi1) + regression_part;
  }
  return -(y - nu) / (g0 * pi0) + regression_part;
}

EstimateReport estimate_censoring_efficient(const CensoringDataset& data,
                                            const CensNuisanceEval& eval,
                                            double level) {
  check_eval(data, eval);
  const Eigen::Index n = data.size();
  Vec values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values[i] = influence_censoring(data.observed[static_cast<std::size_t>(i)],
                                    data.y[i], eval.mu_t[i], eval.nu[i],
                                    eval.pi1[i], eval.g1[i]);
  }
  return finalize("censoring-efficient", std::move(values), level,
                  eval.clip_count, /*naive_ci=*/false);
}

EstimateReport estimate_censoring_efficient(const CensoringDataset& data,
                                            const FoldNuisancesCens& nuisances,
                                            double level) {
  return estimate_censoring_efficient(data, evaluate_nuisances(data, nuisances),
                                      level);
}

EstimateReport estimate_censoring_ipw(const CensoringDataset& data,
                                      const CensNuisanceEval& eval,
                                      double level, bool nuisances_estimated) {
  check_eval(data, eval);
  const Eigen::Index n = data.size();
  Vec values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi1 = eval.pi1[i];
    const double pi0 = 1.0 - pi1;
    const double g1 = eval.g1[i];
    const double g0 = 1.0 - g1;
    const double y = data.y[i];
    if (data.observed[static_cast<std::size_t>(i)] == 1) {
      values[i] = y / pi1 + g1 * y / (g0 * pi1);
    } else {
      values[i] = -y / (g0 * pi0);
    }
  }
  return finalize("censoring-ipw", std::move(values), level, eval.clip_count,
                  nuisances_estimated);
}

EstimateReport estimate_censoring_dm(const CensoringDataset& data,
                                     const CensNuisanceEval& eval,
                                     double level) {
  check_eval(data, eval);
  const Eigen::Index n = data.size();
  Vec values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g1 = eval.g1[i];
    const double g0 = 1.0 - g1;
    values[i] = eval.mu_t[i] - eval.nu[i] / g0 + (g1 / g0) * eval.mu_t[i];
  }
  return finalize("censoring-dm", std::move(values), level, eval.clip_count,
                  /*naive_ci=*/true);
}

EstimateReport estimate_censoring_dm(const CensoringDataset& data,
                                     const FoldNuisancesCens& nuisances,
                                     double level) {
  return estimate_censoring_dm(data, evaluate_nuisances(data, nuisances), level);
}

}  // namespace puate
