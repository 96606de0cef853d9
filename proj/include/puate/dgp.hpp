#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "puate/crossfit.hpp"
#include "puate/data.hpp"

namespace puate {

// Synthetic censoring-setting design. Linear flavor: treatment probability
// trunc(sigmoid(x'beta), trunc_lo, trunc_hi), outcome x'beta + 1.1 + tau0 d +
// noise. Nonlinear flavor: treatment probability sigmoid(x'beta1 + (x.^2)'
// beta2), outcome (x'beta)^2 + 1.1 + tau0 d + noise.
struct CensoringScenario {
  enum class Flavor { Linear, Nonlinear };
  Flavor flavor = Flavor::Linear;
  int p = 3;
  long n = 3000;
  double c = 0.5;  // labeling probability P(O=1 | D=1)
  double tau0 = 3.0;
  double trunc_lo = 0.1;
  double trunc_hi = 0.9;
  Vec beta;        // outcome (and linear-flavor treatment) coefficients
  Vec beta_prop1;  // nonlinear treatment coefficients, linear part
  Vec beta_prop2;  // nonlinear treatment coefficients, squared part
  double noise_sd = 1.0;

  // Draws any empty coefficient vectors from N(0, 0.5 I); call once per
  // experiment so all trials share the same design.
  void materialize(std::uint64_t seed);
};

// Synthetic case-control design: treated covariates from N(mu_p 1, I),
// population mixture prior * N(mu_p 1, I) + (1-prior) * N(mu_n 1, I).
struct CaseControlScenario {
  enum class Flavor { Linear, Nonlinear };
  Flavor flavor = Flavor::Linear;
  int p = 3;
  long m = 1000;
  long l = 2000;
  double mu_p = 0.5;
  double mu_n = 0.0;
  double class_prior = 0.3;  // e(1)
  double tau0 = 3.0;
  Vec beta;
  double noise_sd = 1.0;

  void materialize(std::uint64_t seed);
};

// True nuisance functions of the censoring design, evaluated at raw
// covariates.
struct CensOracle {
  CensoringScenario scenario;
  double kappa(const Vec& x) const;  // P(D = 1 | x)
  double pi1(const Vec& x) const;    // P(O = 1 | x) = c * kappa
  double g1(const Vec& x) const;     // P(D = 1 | x, O = 0)
  double mu_c(const Vec& x) const;   // E[Y(0) | x]
  double mu_t(const Vec& x) const;   // E[Y(1) | x]
  double nu(const Vec& x) const;     // E[Y | x, O = 0]
};

struct CcOracle {
  CaseControlScenario scenario;
  double e1(const Vec& x) const;     // P(D = 1 | x)
  double ratio(const Vec& x) const;  // zeta_0 / zeta_T at x
  double mu_c(const Vec& x) const;
  double mu_t(const Vec& x) const;
  double mu_u(const Vec& x) const;   // E[Y_U | x]
};

struct CensoringDraw {
  CensoringDataset data;
  CensOracle oracle;
  std::vector<int> hidden_treatment;  // diagnostics only, never fed to estimators
};

struct CaseControlDraw {
  CaseControlData data;
  CcOracle oracle;
  std::vector<int> hidden_treatment;  // latent D of the unlabeled sample
};

CensoringDraw gen_censoring(const CensoringScenario& scenario,
                            std::uint64_t seed);
CaseControlDraw gen_casecontrol(const CaseControlScenario& scenario,
                                std::uint64_t seed);

// Auxiliary (X, O) sample from the same censoring design, without outcomes.
struct AuxSample {
  Mat x;
  std::vector<int> observed;
};
AuxSample gen_censoring_aux(const CensoringScenario& scenario, long n_aux,
                            std::uint64_t seed);

// Per-sample nuisance evaluations filled from the true functions, with
// probabilities clipped like fitted ones. clip_eps = 0 keeps them exact.
CensNuisanceEval oracle_nuisance_eval(const CensoringDataset& data,
                                      const CensOracle& oracle,
                                      double clip_eps = kDefaultClipEps);
CcNuisanceEval oracle_nuisance_eval(const CaseControlData& data,
                                    const CcOracle& oracle,
                                    double clip_eps = kDefaultClipEps);

// ---------------------------------------------------------------------------
// External covariates and semi-synthetic outcomes

struct CsvSchema {
  std::vector<std::string> continuous;
  std::vector<std::string> binary;
  std::string treatment;     // optional column of 0/1 treatment indicators
  bool standardize = false;  // continuous columns only
};

struct CovariateTable {
  Mat x;  // columns ordered: continuous..., binary...
  std::vector<std::string> column_names;
  std::optional<std::vector<int>> treatment;
};

// Reads a header-row CSV and returns the schema-selected columns. Binary
// columns must contain only 0/1. With standardize set, continuous columns are
// centered and scaled to unit variance.
CovariateTable load_covariates_csv(const std::string& path,
                                   const CsvSchema& schema);

// Semi-synthetic response surfaces over external covariates.
//   Surface A: y(0) ~ N(x'gamma, 1), y(1) ~ N(x'gamma + 4, 1).
//   Surface B: y(0) ~ N(exp((x + 0.5)'gamma), 1), y(1) ~ N(x'gamma - q, 1),
//   with q solved so the treated-conditional effect averages 4.
struct ResponseSurfaceSpec {
  enum class Surface { A, B };
  Surface surface = Surface::A;
  Vec gamma;  // drawn from the surface's discrete support when empty
};

struct SurfaceOutcome {
  Vec y;        // observed outcome, y(d_i)
  Vec y1_mean;  // conditional means of the potential outcomes
  Vec y0_mean;
  double ate = 0.0;  // mean of y1_mean - y0_mean over all units
  double att = 0.0;  // same mean over treated units
  double q = 0.0;    // surface-B normalizer (0 for surface A)
  Vec gamma;
};

SurfaceOutcome simulate_response_surface(const ResponseSurfaceSpec& spec,
                                         const Mat& covariates,
                                         const std::vector<int>& treatment,
                                         std::uint64_t seed);

// Derives PU observation patterns from a fully labeled (X, D, Y) dataset.
CensoringDataset derive_censoring_view(const Mat& x,
                                       const std::vector<int>& treatment,
                                       const Vec& y, double label_prob,
                                       std::uint64_t seed);
CaseControlData derive_casecontrol_view(const Mat& x,
                                        const std::vector<int>& treatment,
                                        const Vec& y, std::uint64_t seed);

// Synthetic stand-in for an external covariate file: 6 continuous and 19
// binary columns plus a covariate-dependent treatment indicator.
struct StandInData {
  Mat x;
  std::vector<int> treatment;
};
StandInData gen_standin_covariates(long rows, std::uint64_t seed);

}  // namespace puate
