#include "puate/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "puate/casecontrol.hpp"
#include "puate/censoring.hpp"
#include "puate/errors.hpp"
#include "puate/rng.hpp"

namespace puate {

namespace {

using nlohmann::json;

std::string method_name(Method m) {
  switch (m) {
    case Method::Efficient: return "eff";
    case Method::Ipw: return "ipw";
    case Method::Dm: return "dm";
  }
  return "?";
}

std::string mode_name(NuisanceMode m) {
  switch (m) {
    case NuisanceMode::Oracle: return "oracle";
    case NuisanceMode::TrueProp: return "true-prop";
    case NuisanceMode::PlugIn: return "plugin";
    case NuisanceMode::Aux: return "aux";
  }
  return "?";
}

Histogram make_histogram(const std::vector<double>& values, int bins = 30) {
  Histogram h;
  if (values.empty()) return h;
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1e-12;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b <= bins; ++b) {
    h.edges[static_cast<std::size_t>(b)] =
        lo + (hi - lo) * static_cast<double>(b) / bins;
  }
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::min(std::max(b, 0), bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct TrialOutput {
  std::vector<TrialRecord> records;  // one per estimator
};

void fill_record(TrialRecord& record, const EstimateReport& report,
                 double tau0) {
  record.tau_hat = report.tau_hat;
  record.se = report.se;
  record.ci_lo = report.ci_lo;
  record.ci_hi = report.ci_hi;
  record.tau0 = tau0;
  record.clip_count = report.clip_count;
  record.covered = report.covers(tau0);
  record.ok = true;
}

}  // namespace

std::string EstimatorChoice::tag() const {
  return method_name(method) + "(" + mode_name(mode) + ")";
}

namespace {

TrialOutput run_censoring_trial(const CensoringScenario& scenario,
                                const McConfig& config, std::uint64_t seed) {
  TrialOutput out;
  out.records.resize(config.estimators.size());

  const CensoringDraw draw = gen_censoring(scenario, seed);
  auto g1_oracle = [oracle = draw.oracle](const Vec& x) { return oracle.g1(x); };

  // Fold models are shared by every estimator that uses fitted nuisances.
  std::map<NuisanceMode, CensNuisanceEval> evals;
  bool fitted_ready = false;
  FoldAssignment folds;
  FoldNuisancesCens fit_true_g, fit_plugin, fit_aux;

  auto ensure_eval = [&](NuisanceMode mode) -> const CensNuisanceEval& {
    auto it = evals.find(mode);
    if (it != evals.end()) return it->second;

    if (mode == NuisanceMode::Oracle) {
      return evals
          .emplace(mode, oracle_nuisance_eval(draw.data, draw.oracle,
                                               config.fit_options.clip_eps))
          .first->second;
    }
    if (!fitted_ready) {
      folds = make_folds(draw.data.size(), config.folds, derive_seed(seed, 11));
      fitted_ready = true;
    }
    switch (mode) {
      case NuisanceMode::TrueProp:
        fit_true_g = fit_nuisances_censoring(
            draw.data, folds, GSource::oracle(g1_oracle), config.fit_options);
        return evals.emplace(mode, evaluate_nuisances(draw.data, fit_true_g))
            .first->second;
      case NuisanceMode::PlugIn:
        fit_plugin = fit_nuisances_censoring(draw.data, folds, GSource::plug_in(),
                                             config.fit_options);
        return evals.emplace(mode, evaluate_nuisances(draw.data, fit_plugin))
            .first->second;
      case NuisanceMode::Aux: {
        const AuxSample aux =
            gen_censoring_aux(scenario, config.n_aux, derive_seed(seed, 13));
        const Mat aux_features =
            config.fit_options.poly_degree == 1 && !config.fit_options.poly_interactions
                ? aux.x
                : DesignMatrix::poly_expand(aux.x, config.fit_options.poly_degree,
                                            config.fit_options.poly_interactions);
        CensoringPropensity cp = fit_censoring_propensity_from_aux(
            aux_features, aux.observed, config.fit_options.clip_eps);
        fit_aux = fit_nuisances_censoring(
            draw.data, folds, GSource::auxiliary(std::move(cp)),
            config.fit_options);
        return evals.emplace(mode, evaluate_nuisances(draw.data, fit_aux))
            .first->second;
      }
      default:
        throw InvalidInput("run_trials: unsupported nuisance mode");
    }
  };

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    const EstimatorChoice& choice = config.estimators[e];
    TrialRecord& record = out.records[e];
    try {
      const CensNuisanceEval& eval = ensure_eval(choice.mode);
      EstimateReport report;
      switch (choice.method) {
        case Method::Efficient:
          report = estimate_censoring_efficient(draw.data, eval, config.level);
          break;
        case Method::Ipw:
          // Fully known weights only in oracle mode; the known-propensity
          // mode still fits the observation model.
          report = estimate_censoring_ipw(
              draw.data, eval, config.level,
              /*nuisances_estimated=*/choice.mode != NuisanceMode::Oracle);
          break;
        case Method::Dm:
          report = estimate_censoring_dm(draw.data, eval, config.level);
          break;
      }
      fill_record(record, report, scenario.tau0);
    } catch (const Error& err) {
      record.ok = false;
      record.error = err.what();
    }
  }
  return out;
}

TrialOutput run_casecontrol_trial(const CaseControlScenario& scenario,
                                  const McConfig& config, std::uint64_t seed) {
  TrialOutput out;
  out.records.resize(config.estimators.size());

  const CaseControlDraw draw = gen_casecontrol(scenario, seed);
  auto e1_oracle = [oracle = draw.oracle](const Vec& x) { return oracle.e1(x); };
  auto r_oracle = [oracle = draw.oracle](const Vec& x) { return oracle.ratio(x); };

  std::map<NuisanceMode, CcNuisanceEval> evals;
  FoldNuisancesCC fit_true_e, fit_plugin;

  auto ensure_eval = [&](NuisanceMode mode) -> const CcNuisanceEval& {
    auto it = evals.find(mode);
    if (it != evals.end()) return it->second;
    if (mode == NuisanceMode::Oracle) {
      return evals
          .emplace(mode, oracle_nuisance_eval(draw.data, draw.oracle,
                                                 config.fit_options.clip_eps))
          .first->second;
    }
    switch (mode) {
      case NuisanceMode::TrueProp:
        fit_true_e = fit_nuisances_casecontrol(
            draw.data, config.folds, derive_seed(seed, 11),
            ESource::oracle(e1_oracle, r_oracle), config.fit_options);
        return evals.emplace(mode, evaluate_nuisances(draw.data, fit_true_e))
            .first->second;
      case NuisanceMode::PlugIn:
        fit_plugin = fit_nuisances_casecontrol(
            draw.data, config.folds, derive_seed(seed, 11),
            ESource::plug_in(scenario.class_prior), config.fit_options);
        return evals.emplace(mode, evaluate_nuisances(draw.data, fit_plugin))
            .first->second;
      default:
        throw InvalidInput("run_trials: unsupported case-control mode");
    }
  };

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    const EstimatorChoice& choice = config.estimators[e];
    TrialRecord& record = out.records[e];
    try {
      const CcNuisanceEval& eval = ensure_eval(choice.mode);
      EstimateReport report;
      switch (choice.method) {
        case Method::Efficient:
          report = estimate_cc_efficient(draw.data, eval, config.level);
          break;
        case Method::Ipw:
          report = estimate_cc_ipw(
              draw.data, eval, config.level,
              /*nuisances_estimated=*/choice.mode == NuisanceMode::PlugIn);
          break;
        case Method::Dm:
          report = estimate_cc_dm(draw.data, eval, config.level);
          break;
      }
      fill_record(record, report, scenario.tau0);
    } catch (const Error& err) {
      record.ok = false;
      record.error = err.what();
    }
  }
  return out;
}

TrialOutput run_semisynthetic_trial(const SemiSyntheticScenario& scenario,
                                    const McConfig& config,
                                    std::uint64_t seed) {
  TrialOutput out;
  out.records.resize(config.estimators.size());

  ResponseSurfaceSpec spec;
  spec.surface = scenario.surface;
  const SurfaceOutcome surface = simulate_response_surface(
      spec, scenario.covariates, scenario.treatment, derive_seed(seed, 21));
  const double tau0 = surface.ate;

  try {
    if (scenario.view == SemiSyntheticScenario::View::Censoring) {
      const CensoringDataset data =
          derive_censoring_view(scenario.covariates, scenario.treatment,
                                surface.y, scenario.label_prob,
                                derive_seed(seed, 22));
      const FoldAssignment folds =
          make_folds(data.size(), config.folds, derive_seed(seed, 11));
      const FoldNuisancesCens fit = fit_nuisances_censoring(
          data, folds, GSource::plug_in(), config.fit_options);
      const CensNuisanceEval eval = evaluate_nuisances(data, fit);
      for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        EstimateReport report;
        switch (config.estimators[e].method) {
          case Method::Efficient:
            report = estimate_censoring_efficient(data, eval, config.level);
            break;
          case Method::Ipw:
            report = estimate_censoring_ipw(data, eval, config.level, true);
            break;
          case Method::Dm:
            report = estimate_censoring_dm(data, eval, config.level);
            break;
        }
        fill_record(out.records[e], report, tau0);
      }
    } else {
      const CaseControlData data =
          derive_casecontrol_view(scenario.covariates, scenario.treatment,
                                  surface.y, derive_seed(seed, 22));
      const FoldNuisancesCC fit = fit_nuisances_casecontrol(
          data, config.folds, derive_seed(seed, 11),
          ESource::plug_in(scenario.class_prior), config.fit_options);
      const CcNuisanceEval eval = evaluate_nuisances(data, fit);
      for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        EstimateReport report;
        switch (config.estimators[e].method) {
          case Method::Efficient:
            report = estimate_cc_efficient(data, eval, config.level);
            break;
          case Method::Ipw:
            report = estimate_cc_ipw(data, eval, config.level, true);
            break;
          case Method::Dm:
            report = estimate_cc_dm(data, eval, config.level);
            break;
        }
        fill_record(out.records[e], report, tau0);
      }
    }
  } catch (const Error& err) {
    for (auto& record : out.records) {
      if (!record.ok) {
        record.error = err.what();
      }
    }
  }
  return out;
}

}  // namespace

McSummary run_trials(const McConfig& config) {
  if (config.trials < 1) throw InvalidInput("run_trials: trials must be >= 1");
  if (config.estimators.empty()) {
    throw InvalidInput("run_trials: no estimators configured");
  }
  for (const EstimatorChoice& choice : config.estimators) {
    if (std::holds_alternative<CaseControlScenario>(config.scenario) &&
        choice.mode == NuisanceMode::Aux) {
      throw InvalidInput("run_trials: aux mode applies to the censoring setting");
    }
    if (std::holds_alternative<SemiSyntheticScenario>(config.scenario) &&
        choice.mode != NuisanceMode::PlugIn) {
      throw InvalidInput(
          "run_trials: semi-synthetic runs support fitted nuisances only");
    }
  }

  McSummary summary;
  summary.config = config;

  if (auto* cens = std::get_if<CensoringScenario>(&summary.config.scenario)) {
    cens->materialize(config.base_seed);
    summary.tau0 = cens->tau0;
  } else if (auto* cc =
                 std::get_if<CaseControlScenario>(&summary.config.scenario)) {
    cc->materialize(config.base_seed);
    summary.tau0 = cc->tau0;
  }

  std::vector<TrialOutput> outputs(static_cast<std::size_t>(config.trials));
  std::atomic<long> next{0};

  auto worker = [&]() {
    for (;;) {
      const long t = next.fetch_add(1);
      if (t >= config.trials) break;
      const std::uint64_t seed =
          derive_seed(config.base_seed, static_cast<std::uint64_t>(t) + 1);
      if (auto* cens =
              std::get_if<CensoringScenario>(&summary.config.scenario)) {
        outputs[static_cast<std::size_t>(t)] =
            run_censoring_trial(*cens, config, seed);
      } else if (auto* cc = std::get_if<CaseControlScenario>(
                     &summary.config.scenario)) {
        outputs[static_cast<std::size_t>(t)] =
            run_casecontrol_trial(*cc, config, seed);
      } else {
        outputs[static_cast<std::size_t>(t)] = run_semisynthetic_trial(
            std::get<SemiSyntheticScenario>(summary.config.scenario), config,
            seed);
      }
    }
  };

  const int workers = std::max(config.workers, 1);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (std::holds_alternative<SemiSyntheticScenario>(summary.config.scenario)) {
    // Trial-specific estimands; report their average for reference.
    double acc = 0.0;
    for (const auto& o : outputs) acc += o.records.front().tau0;
    summary.tau0 = acc / static_cast<double>(config.trials);
  }

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    EstimatorSummary es;
    es.tag = config.estimators[e].tag();
    es.trials.reserve(static_cast<std::size_t>(config.trials));

    // Aggregate the per-trial errors tau_hat - tau0 so the decomposition
    // mse = bias^2 + variance stays exact when estimands vary by trial.
    std::vector<double> taus, errors;
    double clip_sum = 0.0;
    long covered = 0;
    for (long t = 0; t < config.trials; ++t) {
      const TrialRecord& r = outputs[static_cast<std::size_t>(t)].records[e];
      es.trials.push_back(r);
      if (!r.ok) {
        ++es.failed;
        continue;
      }
      taus.push_back(r.tau_hat);
      errors.push_back(r.tau_hat - r.tau0);
      clip_sum += static_cast<double>(r.clip_count);
      if (r.covered) ++covered;
    }
    const double ok_count = static_cast<double>(taus.size());
    if (!taus.empty()) {
      double sq_err = 0.0, sum_err = 0.0;
      for (double err : errors) {
        sq_err += err * err;
        sum_err += err;
      }
      es.mse = sq_err / ok_count;
      es.bias = sum_err / ok_count;
      es.coverage = static_cast<double>(covered) / ok_count;
      es.mean_clip_count = clip_sum / ok_count;
      double var = 0.0;
      for (double err : errors) var += (err - es.bias) * (err - es.bias);
      es.variance = var / ok_count;
      es.histogram = make_histogram(taus);
    }
    summary.estimators.push_back(std::move(es));
  }
  return summary;
}

std::string summarize_table(const McSummary& summary) {
  std::ostringstream os;
  char buf[64];

  os << "estimand tau0 = " << summary.tau0 << ",  trials = "
     << (summary.estimators.empty()
             ? 0
             : static_cast<long>(summary.estimators.front().trials.size()))
     << "\n";
  std::snprintf(buf, sizeof(buf), "%-12s", "");
  os << buf;
  for (const auto& es : summary.estimators) {
    std::snprintf(buf, sizeof(buf), "%16s", es.tag.c_str());
    os << buf;
  }
  os << "\n";

  auto row = [&](const char* name, auto getter) {
    std::snprintf(buf, sizeof(buf), "%-12s", name);
    os << buf;
    for (const auto& es : summary.estimators) {
      std::snprintf(buf, sizeof(buf), "%16.4f", getter(es));
      os << buf;
    }
    os << "\n";
  };
  row("MSE", [](const EstimatorSummary& e) { return e.mse; });
  row("Bias", [](const EstimatorSummary& e) { return e.bias; });
  row("Cov. ratio", [](const EstimatorSummary& e) { return e.coverage; });
  row("Variance", [](const EstimatorSummary& e) { return e.variance; });
  row("Mean clips", [](const EstimatorSummary& e) { return e.mean_clip_count; });

  bool any_failed = false;
  for (const auto& es : summary.estimators) any_failed |= es.failed > 0;
  if (any_failed) {
    std::snprintf(buf, sizeof(buf), "%-12s", "Failed");
    os << buf;
    for (const auto& es : summary.estimators) {
      std::snprintf(buf, sizeof(buf), "%16ld", es.failed);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json scenario_json(const McConfig& config) {
  json j;
  if (const auto* cens = std::get_if<CensoringScenario>(&config.scenario)) {
    j["setting"] = "censoring";
    j["flavor"] =
        cens->flavor == CensoringScenario::Flavor::Linear ? "linear" : "nonlinear";
    j["n"] = cens->n;
    j["p"] = cens->p;
    j["c"] = cens->c;
    j["tau0"] = cens->tau0;
    j["trunc"] = {cens->trunc_lo, cens->trunc_hi};
    j["beta"] = std::vector<double>(cens->beta.data(),
                                    cens->beta.data() + cens->beta.size());
    if (cens->beta_prop1.size() > 0) {
      j["beta_prop1"] = std::vector<double>(
          cens->beta_prop1.data(),
          cens->beta_prop1.data() + cens->beta_prop1.size());
      j["beta_prop2"] = std::vector<double>(
          cens->beta_prop2.data(),
          cens->beta_prop2.data() + cens->beta_prop2.size());
    }
  } else if (const auto* semi =
                 std::get_if<SemiSyntheticScenario>(&config.scenario)) {
    j["setting"] = "semisynthetic";
    j["surface"] =
        semi->surface == ResponseSurfaceSpec::Surface::A ? "A" : "B";
    j["view"] = semi->view == SemiSyntheticScenario::View::Censoring
                    ? "censoring"
                    : "casecontrol";
    j["rows"] = semi->covariates.rows();
    j["cols"] = semi->covariates.cols();
    j["label_prob"] = semi->label_prob;
    j["class_prior"] = semi->class_prior;
  } else {
    const auto& cc = std::get<CaseControlScenario>(config.scenario);
    j["setting"] = "casecontrol";
    j["flavor"] =
        cc.flavor == CaseControlScenario::Flavor::Linear ? "linear" : "nonlinear";
    j["m"] = cc.m;
    j["l"] = cc.l;
    j["p"] = cc.p;
    j["mu_p"] = cc.mu_p;
    j["mu_n"] = cc.mu_n;
    j["class_prior"] = cc.class_prior;
    j["tau0"] = cc.tau0;
    j["beta"] =
        std::vector<double>(cc.beta.data(), cc.beta.data() + cc.beta.size());
  }
  return j;
}

}  // namespace

void export_csv(const McSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("export_csv: cannot open " + path);
  out << "trial,estimator,tau_hat,se,ci_lo,ci_hi,covered,clip_count\n";
  for (const auto& es : summary.estimators) {
    for (std::size_t t = 0; t < es.trials.size(); ++t) {
      const TrialRecord& r = es.trials[t];
      if (!r.ok) continue;
      out << t << ',' << es.tag << ',' << num17(r.tau_hat) << ','
          << num17(r.se) << ',' << num17(r.ci_lo) << ',' << num17(r.ci_hi)
          << ',' << (r.covered ? 1 : 0) << ',' << r.clip_count << '\n';
    }
  }
  if (!out) throw IoError("export_csv: write failure on " + path);
}

void export_json(const McSummary& summary, const std::string& path) {
  json j;
  j["config"]["scenario"] = scenario_json(summary.config);
  j["config"]["trials"] = summary.config.trials;
  j["config"]["base_seed"] = summary.config.base_seed;
  j["config"]["level"] = summary.config.level;
  j["config"]["folds"] = summary.config.folds;
  j["config"]["workers"] = summary.config.workers;
  j["config"]["clip_eps"] = summary.config.fit_options.clip_eps;
  j["config"]["poly_degree"] = summary.config.fit_options.poly_degree;
  j["config"]["poly_interactions"] = summary.config.fit_options.poly_interactions;
  j["config"]["ridge"] = summary.config.fit_options.ridge;
  j["tau0"] = summary.tau0;

  j["estimators"] = json::array();
  for (const auto& es : summary.estimators) {
    json je;
    je["tag"] = es.tag;
    je["mse"] = es.mse;
    je["bias"] = es.bias;
    je["coverage"] = es.coverage;
    je["variance"] = es.variance;
    je["mean_clip_count"] = es.mean_clip_count;
    je["failed"] = es.failed;
    je["histogram"]["edges"] = es.histogram.edges;
    je["histogram"]["counts"] = es.histogram.counts;
    je["trials"] = json::array();
    for (std::size_t t = 0; t < es.trials.size(); ++t) {
      const TrialRecord& r = es.trials[t];
      json jt;
      jt["trial"] = t;
      jt["ok"] = r.ok;
      if (r.ok) {
        jt["tau_hat"] = r.tau_hat;
        jt["se"] = r.se;
        jt["ci_lo"] = r.ci_lo;
        jt["ci_hi"] = r.ci_hi;
        jt["covered"] = r.covered;
        jt["tau0"] = r.tau0;
        jt["clip_count"] = r.clip_count;
      } else {
        jt["error"] = r.error;
      }
      je["trials"].push_back(std::move(jt));
    }
    j["estimators"].push_back(std::move(je));
  }

  std::ofstream out(path);
  if (!out) throw IoError("export_json: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("export_json: write failure on " + path);
}

}  // namespace puate
