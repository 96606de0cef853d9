#include "puate/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "puate/errors.hpp"
#include "puate/rng.hpp"

namespace puate {

namespace {

Vec draw_gaussian_vec(Rng& rng, int size, double sd) {
  Vec v(size);
  for (int i = 0; i < size; ++i) v[i] = sd * rng.normal();
  return v;
}

double truncate(double t, double lo, double hi) {
  return std::min(std::max(t, lo), hi);
}

}  // namespace

void CensoringScenario::materialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 900));
  const double sd = std::sqrt(0.5);
  if (beta.size() == 0) beta = draw_gaussian_vec(rng, p, sd);
  if (flavor == Flavor::Nonlinear) {
    if (beta_prop1.size() == 0) beta_prop1 = draw_gaussian_vec(rng, p, sd);
    if (beta_prop2.size() == 0) beta_prop2 = draw_gaussian_vec(rng, p, sd);
  }
}

void CaseControlScenario::materialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 901));
  if (beta.size() == 0) beta = draw_gaussian_vec(rng, p, std::sqrt(0.5));
}

double CensOracle::kappa(const Vec& x) const {
  if (scenario.flavor == CensoringScenario::Flavor::Linear) {
    return truncate(sigmoid(x.dot(scenario.beta)), scenario.trunc_lo,
                    scenario.trunc_hi);
  }
  const double score = x.dot(scenario.beta_prop1) +
                       x.array().square().matrix().dot(scenario.beta_prop2);
  return sigmoid(score);
}

double CensOracle::pi1(const Vec& x) const { return scenario.c * kappa(x); }

double CensOracle::g1(const Vec& x) const {
  const double k = kappa(x);
  const double p1 = scenario.c * k;
  return (1.0 - scenario.c) * k / std::max(1.0 - p1, 1e-12);
}

double CensOracle::mu_c(const Vec& x) const {
  const double base = x.dot(scenario.beta);
  if (scenario.flavor == CensoringScenario::Flavor::Linear) {
    return base + 1.1;
  }
  return base * base + 1.1;
}

double CensOracle::mu_t(const Vec& x) const { return mu_c(x) + scenario.tau0; }

double CensOracle::nu(const Vec& x) const {
  const double g = g1(x);
  return g * mu_t(x) + (1.0 - g) * mu_c(x);
}

CensoringDraw gen_censoring(const CensoringScenario& scenario,
                            std::uint64_t seed) {
  if (scenario.beta.size() != scenario.p) {
    throw InvalidInput("gen_censoring: scenario not materialized");
  }
  if (scenario.flavor == CensoringScenario::Flavor::Nonlinear &&
      (scenario.beta_prop1.size() != scenario.p ||
       scenario.beta_prop2.size() != scenario.p)) {
    throw InvalidInput("gen_censoring: nonlinear coefficients missing");
  }

  CensoringDraw draw;
  draw.oracle.scenario = scenario;

  Rng rng(seed);
  const long n = scenario.n;
  draw.data.x.resize(n, scenario.p);
  draw.data.y.resize(n);
  draw.data.observed.resize(static_cast<std::size_t>(n));
  draw.hidden_treatment.resize(static_cast<std::size_t>(n));

  for (long i = 0; i < n; ++i) {
    Vec x(scenario.p);
    for (int j = 0; j < scenario.p; ++j) x[j] = rng.normal();
    draw.data.x.row(i) = x.transpose();

    const int d = rng.bernoulli(draw.oracle.kappa(x)) ? 1 : 0;
    const int o = (d == 1 && rng.bernoulli(scenario.c)) ? 1 : 0;
    draw.hidden_treatment[static_cast<std::size_t>(i)] = d;
    draw.data.observed[static_cast<std::size_t>(i)] = o;

    const double noise = scenario.noise_sd * rng.normal();
    draw.data.y[i] = draw.oracle.mu_c(x) + scenario.tau0 * d + noise;
  }
  return draw;
}

AuxSample gen_censoring_aux(const CensoringScenario& scenario, long n_aux,
                            std::uint64_t seed) {
  if (n_aux <= 0) {
    throw NoData("gen_censoring_aux: auxiliary sample size must be positive");
  }
  CensOracle oracle{scenario};
  Rng rng(seed);
  AuxSample aux;
  aux.x.resize(n_aux, scenario.p);
  aux.observed.resize(static_cast<std::size_t>(n_aux));
  for (long i = 0; i < n_aux; ++i) {
    Vec x(scenario.p);
    for (int j = 0; j < scenario.p; ++j) x[j] = rng.normal();
    aux.x.row(i) = x.transpose();
    const int d = rng.bernoulli(oracle.kappa(x)) ? 1 : 0;
    aux.observed[static_cast<std::size_t>(i)] =
        (d == 1 && rng.bernoulli(scenario.c)) ? 1 : 0;
  }
  return aux;
}

double CcOracle::e1(const Vec& x) const {
  // Posterior of the two-Gaussian mixture: both components share identity
  // covariance, so the log ratio is linear in x.
  const auto& sc = scenario;
  const double p = static_cast<double>(sc.p);
  const double log_ratio = (sc.mu_p - sc.mu_n) * x.sum() -
                           0.5 * p * (sc.mu_p * sc.mu_p - sc.mu_n * sc.mu_n);
  const double logit =
      std::log(sc.class_prior / (1.0 - sc.class_prior)) + log_ratio;
  return sigmoid(logit);
}

double CcOracle::ratio(const Vec& x) const {
  return scenario.class_prior / e1(x);
}

double CcOracle::mu_c(const Vec& x) const {
  const double base = x.dot(scenario.beta);
  if (scenario.flavor == CaseControlScenario::Flavor::Linear) {
    return base + 1.1;
  }
  return base * base + 1.1;
}

double CcOracle::mu_t(const Vec& x) const { return mu_c(x) + scenario.tau0; }

double CcOracle::mu_u(const Vec& x) const {
  return mu_c(x) + e1(x) * scenario.tau0;
}

CaseControlDraw gen_casecontrol(const CaseControlScenario& scenario,
                                std::uint64_t seed) {
  if (scenario.beta.size() != scenario.p) {
    throw InvalidInput("gen_casecontrol: scenario not materialized");
  }
  CaseControlDraw draw;
  draw.oracle.scenario = scenario;

  Rng rng(seed);
  draw.data.x_treated.resize(scenario.m, scenario.p);
  draw.data.y_treated.resize(scenario.m);
  for (long j = 0; j < scenario.m; ++j) {
    Vec x(scenario.p);
    for (int q = 0; q < scenario.p; ++q) x[q] = scenario.mu_p + rng.normal();
    draw.data.x_treated.row(j) = x.transpose();
    draw.data.y_treated[j] =
        draw.oracle.mu_t(x) + scenario.noise_sd * rng.normal();
  }

  draw.data.x_unlabeled.resize(scenario.l, scenario.p);
  draw.data.y_unlabeled.resize(scenario.l);
  draw.hidden_treatment.resize(static_cast<std::size_t>(scenario.l));
  for (long k = 0; k < scenario.l; ++k) {
    const int d = rng.bernoulli(scenario.class_prior) ? 1 : 0;
    const double center = d == 1 ? scenario.mu_p : scenario.mu_n;
    Vec x(scenario.p);
    for (int q = 0; q < scenario.p; ++q) x[q] = center + rng.normal();
    draw.data.x_unlabeled.row(k) = x.transpose();
    draw.hidden_treatment[static_cast<std::size_t>(k)] = d;
    draw.data.y_unlabeled[k] = draw.oracle.mu_c(x) + scenario.tau0 * d +
                               scenario.noise_sd * rng.normal();
  }
  return draw;
}

CensNuisanceEval oracle_nuisance_eval(const CensoringDataset& data,
                                      const CensOracle& oracle,
                                      double clip_eps) {
  const Eigen::Index n = data.size();
  CensNuisanceEval eval;
  eval.mu_t.resize(n);
  eval.nu.resize(n);
  eval.pi1.resize(n);
  eval.g1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec x = data.x.row(i).transpose();
    eval.mu_t[i] = oracle.mu_t(x);
    eval.nu[i] = oracle.nu(x);
    const double raw_pi = oracle.pi1(x);
    const double raw_g = oracle.g1(x);
    eval.pi1[i] = clamp_prob(raw_pi, clip_eps);
    eval.g1[i] = clamp_prob(raw_g, clip_eps);
    if (eval.pi1[i] != raw_pi) ++eval.clip_count;
    if (eval.g1[i] != raw_g) ++eval.clip_count;
  }
  return eval;
}

CcNuisanceEval oracle_nuisance_eval(const CaseControlData& data,
                                    const CcOracle& oracle, double clip_eps) {
  CcNuisanceEval eval;
  eval.mu_t_treated.resize(data.m());
  eval.e1_treated.resize(data.m());
  eval.ratio_treated.resize(data.m());
  eval.mu_t_unlabeled.resize(data.l());
  eval.mu_u_unlabeled.resize(data.l());
  eval.e1_unlabeled.resize(data.l());
  for (Eigen::Index j = 0; j < data.m(); ++j) {
    const Vec x = data.x_treated.row(j).transpose();
    eval.mu_t_treated[j] = oracle.mu_t(x);
    const double raw = oracle.e1(x);
    eval.e1_treated[j] = clamp_prob(raw, clip_eps);
    if (eval.e1_treated[j] != raw) ++eval.clip_count;
    eval.ratio_treated[j] = oracle.ratio(x);
  }
  for (Eigen::Index k = 0; k < data.l(); ++k) {
    const Vec x = data.x_unlabeled.row(k).transpose();
    eval.mu_t_unlabeled[k] = oracle.mu_t(x);
    eval.mu_u_unlabeled[k] = oracle.mu_u(x);
    const double raw = oracle.e1(x);
    eval.e1_unlabeled[k] = clamp_prob(raw, clip_eps);
    if (eval.e1_unlabeled[k] != raw) ++eval.clip_count;
  }
  return eval;
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

CovariateTable load_covariates_csv(const std::string& path,
                                   const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("load_covariates_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw CsvError("load_covariates_csv: empty file", 1, 1);
  }
  const std::vector<std::string> header = split_csv_line(line);
  std::unordered_map<std::string, long> col_index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    col_index[trim(header[j])] = static_cast<long>(j);
  }

  auto require_column = [&](const std::string& name) -> long {
    const auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw SchemaError("load_covariates_csv: column '" + name +
                        "' not found in header");
    }
    return it->second;
  };

  std::vector<long> selected;
  CovariateTable table;
  for (const auto& name : schema.continuous) {
    selected.push_back(require_column(name));
    table.column_names.push_back(name);
  }
  const std::size_t n_continuous = selected.size();
  for (const auto& name : schema.binary) {
    selected.push_back(require_column(name));
    table.column_names.push_back(name);
  }
  long treatment_col = -1;
  if (!schema.treatment.empty()) treatment_col = require_column(schema.treatment);

  std::vector<std::vector<double>> rows;
  std::vector<int> treatment;
  long row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw CsvError("load_covariates_csv: wrong cell count", row_number,
                     static_cast<long>(cells.size()) + 1);
    }
    std::vector<double> row;
    row.reserve(selected.size());
    for (std::size_t j = 0; j < selected.size(); ++j) {
      const std::string cell = trim(cells[static_cast<std::size_t>(selected[j])]);
      double value = 0.0;
      try {
        std::size_t consumed = 0;
        value = std::stod(cell, &consumed);
        if (consumed != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw CsvError("load_covariates_csv: non-numeric cell '" + cell + "'",
                       row_number, selected[j] + 1);
      }
      if (j >= n_continuous && value != 0.0 && value != 1.0) {
        throw SchemaError("load_covariates_csv: binary column '" +
                          table.column_names[j] + "' holds " + cell +
                          " at row " + std::to_string(row_number));
      }
      row.push_back(value);
    }
    if (treatment_col >= 0) {
      const std::string cell =
          trim(cells[static_cast<std::size_t>(treatment_col)]);
      if (cell != "0" && cell != "1") {
        throw SchemaError("load_covariates_csv: treatment column holds '" +
                          cell + "' at row " + std::to_string(row_number));
      }
      treatment.push_back(cell == "1" ? 1 : 0);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw NoData("load_covariates_csv: no data rows");

  table.x.resize(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(selected.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  if (treatment_col >= 0) table.treatment = std::move(treatment);

  if (schema.standardize) {
    for (std::size_t j = 0; j < n_continuous; ++j) {
      auto col = table.x.col(static_cast<Eigen::Index>(j));
      const double m = col.mean();
      const double sd = std::sqrt((col.array() - m).square().mean());
      if (sd > 0.0) col = (col.array() - m) / sd;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Response surfaces

namespace {

Vec draw_gamma(Rng& rng, Eigen::Index p, ResponseSurfaceSpec::Surface surface) {
  const std::vector<double> values_a = {0.0, 1.0, 2.0, 3.0, 4.0};
  const std::vector<double> probs_a = {0.5, 0.2, 0.15, 0.1, 0.05};
  const std::vector<double> values_b = {0.0, 0.1, 0.2, 0.3, 0.4};
  const std::vector<double> probs_b = {0.6, 0.1, 0.1, 0.1, 0.1};
  const auto& values =
      surface == ResponseSurfaceSpec::Surface::A ? values_a : values_b;
  const auto& probs =
      surface == ResponseSurfaceSpec::Surface::A ? probs_a : probs_b;

  Vec gamma(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double u = rng.uniform01();
    double acc = 0.0;
    double chosen = values.back();
    for (std::size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) {
        chosen = values[k];
        break;
      }
    }
    gamma[j] = chosen;
  }
  return gamma;
}

}  // namespace

SurfaceOutcome simulate_response_surface(const ResponseSurfaceSpec& spec,
                                         const Mat& covariates,
                                         const std::vector<int>& treatment,
                                         std::uint64_t seed) {
  const Eigen::Index n = covariates.rows();
  if (static_cast<Eigen::Index>(treatment.size()) != n) {
    throw InvalidInput("simulate_response_surface: treatment length mismatch");
  }
  long treated = 0;
  for (int d : treatment) treated += d;
  if (treated == 0) {
    throw NoPositives("simulate_response_surface: no treated units");
  }

  Rng rng(seed);
  SurfaceOutcome out;
  out.gamma = spec.gamma.size() > 0
                  ? spec.gamma
                  : draw_gamma(rng, covariates.cols(), spec.surface);
  if (out.gamma.size() != covariates.cols()) {
    throw InvalidInput("simulate_response_surface: gamma dimension mismatch");
  }

  const Vec linear = covariates * out.gamma;
  out.y0_mean.resize(n);
  out.y1_mean.resize(n);

  if (spec.surface == ResponseSurfaceSpec::Surface::A) {
    out.y0_mean = linear;
    out.y1_mean = linear.array() + 4.0;
    out.q = 0.0;
  } else {
    const Vec offset_linear = (covariates.array() + 0.5).matrix() * out.gamma;
    out.y0_mean = offset_linear.array().exp();
    // Solve mean over treated of [(x'gamma - q) - y0_mean] = 4 for q by
    // bisection; the target is monotone in q.
    auto att_minus_target = [&](double q) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (treatment[static_cast<std::size_t>(i)] == 1) {
          acc += (linear[i] - q) - out.y0_mean[i];
        }
      }
      return acc / static_cast<double>(treated) - 4.0;
    };
    double lo = -1e6, hi = 1e6;
    for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (att_minus_target(mid) > 0.0) {
        lo = mid;  // effect too large; raise q
      } else {
        hi = mid;
      }
    }
    out.q = 0.5 * (lo + hi);
    out.y1_mean = linear.array() - out.q;
  }

  out.y.resize(n);
  double ate_acc = 0.0, att_acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double effect = out.y1_mean[i] - out.y0_mean[i];
    ate_acc += effect;
    if (treatment[static_cast<std::size_t>(i)] == 1) att_acc += effect;
    const double mean =
        treatment[static_cast<std::size_t>(i)] == 1 ? out.y1_mean[i] : out.y0_mean[i];
    out.y[i] = mean + rng.normal();
  }
  out.ate = ate_acc / static_cast<double>(n);
  out.att = att_acc / static_cast<double>(treated);
  return out;
}

CensoringDataset derive_censoring_view(const Mat& x,
                                       const std::vector<int>& treatment,
                                       const Vec& y, double label_prob,
                                       std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(treatment.size()) != n || y.size() != n) {
    throw InvalidInput("derive_censoring_view: length mismatch");
  }
  long treated = 0;
  for (int d : treatment) treated += d;
  if (treated == 0) throw NoPositives("derive_censoring_view: no treated units");

  Rng rng(seed);
  CensoringDataset data;
  data.x = x;
  data.y = y;
  data.observed.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool labeled =
        treatment[static_cast<std::size_t>(i)] == 1 && rng.bernoulli(label_prob);
    data.observed[static_cast<std::size_t>(i)] = labeled ? 1 : 0;
  }
  return data;
}

CaseControlData derive_casecontrol_view(const Mat& x,
                                        const std::vector<int>& treatment,
                                        const Vec& y, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(treatment.size()) != n || y.size() != n) {
    throw InvalidInput("derive_casecontrol_view: length mismatch");
  }

  // Random half split: one half becomes the unlabeled sample, the treated
  // units of the other half become the treated sample.
  std::vector<long> order(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(
        rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  const long half = n / 2;
  std::vector<long> treated_rows, unlabeled_rows;
  for (long k = 0; k < n; ++k) {
    const long i = order[static_cast<std::size_t>(k)];
    if (k < half) {
      unlabeled_rows.push_back(i);
    } else if (treatment[static_cast<std::size_t>(i)] == 1) {
      treated_rows.push_back(i);
    }
  }
  if (treated_rows.empty()) {
    throw NoPositives("derive_casecontrol_view: no treated units in split");
  }

  CaseControlData data;
  data.x_treated.resize(static_cast<Eigen::Index>(treated_rows.size()), x.cols());
  data.y_treated.resize(static_cast<Eigen::Index>(treated_rows.size()));
  for (std::size_t j = 0; j < treated_rows.size(); ++j) {
    data.x_treated.row(static_cast<Eigen::Index>(j)) = x.row(treated_rows[j]);
    data.y_treated[static_cast<Eigen::Index>(j)] = y[treated_rows[j]];
  }
  data.x_unlabeled.resize(static_cast<Eigen::Index>(unlabeled_rows.size()),
                          x.cols());
  data.y_unlabeled.resize(static_cast<Eigen::Index>(unlabeled_rows.size()));
  for (std::size_t k = 0; k < unlabeled_rows.size(); ++k) {
    data.x_unlabeled.row(static_cast<Eigen::Index>(k)) = x.row(unlabeled_rows[k]);
    data.y_unlabeled[static_cast<Eigen::Index>(k)] = y[unlabeled_rows[k]];
  }
  return data;
}

StandInData gen_standin_covariates(long rows, std::uint64_t seed) {
  Rng rng(seed);
  StandInData out;
  const int continuous = 6, binary = 19;
  out.x.resize(rows, continuous + binary);
  out.treatment.resize(static_cast<std::size_t>(rows));
  for (long i = 0; i < rows; ++i) {
    for (int j = 0; j < continuous; ++j) out.x(i, j) = rng.normal();
    for (int j = 0; j < binary; ++j) {
      out.x(i, continuous + j) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    }
    const double score = 0.6 * out.x(i, 0) - 0.4 * out.x(i, 1) +
                         0.5 * out.x(i, continuous) - 0.6;
    out.treatment[static_cast<std::size_t>(i)] = rng.bernoulli(sigmoid(score));
  }
  return out;
}

}  // namespace puate
