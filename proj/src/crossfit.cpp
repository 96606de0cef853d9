#include "puate/crossfit.hpp"

#include <algorithm>
#include <string>

#include "puate/errors.hpp"
#include "puate/rng.hpp"

namespace puate {

namespace {

// Rows of `raw` selected by `idx`.
Mat take_rows(const Mat& raw, const std::vector<long>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), raw.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = raw.row(idx[i]);
  }
  return out;
}

Vec take(const Vec& v, const std::vector<long>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  }
  return out;
}

Mat expand(const Mat& raw, const NuisanceFitOptions& options) {
  if (options.poly_degree == 1 && !options.poly_interactions) return raw;
  return DesignMatrix::poly_expand(raw, options.poly_degree,
                                   options.poly_interactions);
}

}  // namespace

FoldAssignment make_folds(long n, int num_folds, std::uint64_t seed) {
  if (num_folds < 2 || static_cast<long>(num_folds) > n) {
    throw InvalidInput("make_folds: need 2 <= L <= n (L=" +
                       std::to_string(num_folds) + ", n=" + std::to_string(n) +
                       ")");
  }

  std::vector<long> order(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (long i = n - 1; i > 0; --i) {  // Fisher-Yates
    const long j = static_cast<long>(
        rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }

  FoldAssignment fa;
  fa.n = n;
  fa.num_folds = num_folds;
  fa.fold_of.assign(static_cast<std::size_t>(n), -1);
  fa.members.resize(static_cast<std::size_t>(num_folds));
  fa.complements.resize(static_cast<std::size_t>(num_folds));

  // First (n mod L) folds take one extra sample.
  const long base = n / num_folds;
  const long extra = n % num_folds;
  long pos = 0;
  for (int f = 0; f < num_folds; ++f) {
    const long size = base + (f < extra ? 1 : 0);
    for (long k = 0; k < size; ++k) {
      const long idx = order[static_cast<std::size_t>(pos++)];
      fa.fold_of[static_cast<std::size_t>(idx)] = f;
      fa.members[static_cast<std::size_t>(f)].push_back(idx);
    }
  }
  for (int f = 0; f < num_folds; ++f) {
    auto& comp = fa.complements[static_cast<std::size_t>(f)];
    for (long i = 0; i < n; ++i) {
      if (fa.fold_of[static_cast<std::size_t>(i)] != f) comp.push_back(i);
    }
  }
  return fa;
}

FoldNuisancesCens fit_nuisances_censoring(const CensoringDataset& data,
                                          const FoldAssignment& folds,
                                          const GSource& g_source,
                                          const NuisanceFitOptions& options) {
  data.validate();
  if (folds.n != data.size()) {
    throw InvalidInput("fit_nuisances_censoring: fold/data size mismatch");
  }

  const Mat features = expand(data.x, options);

  FoldNuisancesCens out;
  out.folds = folds;
  out.g_source = g_source;
  out.options = options;

  for (int f = 0; f < folds.num_folds; ++f) {
    const auto& train = folds.complements[static_cast<std::size_t>(f)];
    std::vector<long> labeled, unlabeled;
    for (long i : train) {
      (data.observed[static_cast<std::size_t>(i)] == 1 ? labeled : unlabeled)
          .push_back(i);
    }
    if (labeled.empty() || unlabeled.empty()) {
      throw DegenerateFold(
          "fit_nuisances_censoring: fold complement " + std::to_string(f) +
          " lacks " + (labeled.empty() ? "labeled" : "unlabeled") +
          " samples");
    }

    const DesignMatrix x_train = DesignMatrix::from_raw(take_rows(features, train));
    const DesignMatrix x_lab = DesignMatrix::from_raw(take_rows(features, labeled));
    const DesignMatrix x_unl =
        DesignMatrix::from_raw(take_rows(features, unlabeled));

    out.mu_t.push_back(fit_ols(x_lab, take(data.y, labeled), options.ridge));
    out.nu.push_back(fit_ols(x_unl, take(data.y, unlabeled), options.ridge));

    std::vector<int> o_train;
    o_train.reserve(train.size());
    for (long i : train) o_train.push_back(data.observed[static_cast<std::size_t>(i)]);
    out.pi.push_back(fit_logistic(x_train, o_train, options.logistic_max_iter,
                                  options.logistic_tol));

    if (g_source.kind == GSource::Kind::PlugIn) {
      CensoringPropensity cp;
      cp.pi_model = out.pi.back();
      cp.clip_eps = options.clip_eps;
      cp.c_hat = estimate_labeling_constant(cp.pi_model, x_train, o_train,
                                            options.clip_eps);
      out.g_plugin.push_back(std::move(cp));
    }

    out.train_idx.push_back(train);
  }
  return out;
}

FoldNuisancesCC fit_nuisances_casecontrol(const CaseControlData& data,
                                          int num_folds, std::uint64_t seed,
                                          const ESource& e_source,
                                          const NuisanceFitOptions& options) {
  data.validate();
  if (data.m() < num_folds || data.l() < num_folds) {
    throw InvalidInput("fit_nuisances_casecontrol: fewer samples than folds");
  }

  FoldNuisancesCC out;
  out.e_source = e_source;
  out.options = options;
  out.treated_folds = make_folds(data.m(), num_folds, derive_seed(seed, 1));
  out.unlabeled_folds = make_folds(data.l(), num_folds, derive_seed(seed, 2));

  const Mat feat_t = expand(data.x_treated, options);
  const Mat feat_u = expand(data.x_unlabeled, options);

  for (int f = 0; f < num_folds; ++f) {
    const auto& train_t = out.treated_folds.complements[static_cast<std::size_t>(f)];
    const auto& train_u =
        out.unlabeled_folds.complements[static_cast<std::size_t>(f)];
    if (train_t.empty() || train_u.empty()) {
      throw DegenerateFold("fit_nuisances_casecontrol: empty training fold");
    }
    const DesignMatrix x_t = DesignMatrix::from_raw(take_rows(feat_t, train_t));
    const DesignMatrix x_u = DesignMatrix::from_raw(take_rows(feat_u, train_u));
    out.mu_t.push_back(fit_ols(x_t, take(data.y_treated, train_t), options.ridge));
    out.mu_u.push_back(
        fit_ols(x_u, take(data.y_unlabeled, train_u), options.ridge));
    out.treated_train_idx.push_back(train_t);
    out.unlabeled_train_idx.push_back(train_u);

    if (e_source.kind == ESource::Kind::PlugIn && e_source.per_fold) {
      UnbiasedPuOptions pu = e_source.pu_options;
      pu.clip_eps = options.clip_eps;
      out.e_models.push_back(fit_unbiased_pu(take_rows(feat_t, train_t),
                                             take_rows(feat_u, train_u),
                                             e_source.class_prior, pu));
    }
  }

  if (e_source.kind == ESource::Kind::PlugIn && !e_source.per_fold) {
    UnbiasedPuOptions pu = e_source.pu_options;
    pu.clip_eps = options.clip_eps;
    out.e_models.push_back(
        fit_unbiased_pu(feat_t, feat_u, e_source.class_prior, pu));
  }
  return out;
}

CensNuisanceEval evaluate_nuisances(const CensoringDataset& data,
                                    const FoldNuisancesCens& nuisances) {
  const Eigen::Index n = data.size();
  const Mat features = expand(data.x, nuisances.options);
  const double eps = nuisances.options.clip_eps;

  CensNuisanceEval eval;
  eval.mu_t.resize(n);
  eval.nu.resize(n);
  eval.pi1.resize(n);
  eval.g1.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const int f = nuisances.folds.fold_of[static_cast<std::size_t>(i)];
    const Vec row = features.row(i).transpose();
    eval.mu_t[i] = predict_mean_at(nuisances.mu_t[static_cast<std::size_t>(f)], row);
    eval.nu[i] = predict_mean_at(nuisances.nu[static_cast<std::size_t>(f)], row);

    const double raw_pi =
        predict_proba_at(nuisances.pi[static_cast<std::size_t>(f)], row, 0.0);
    eval.pi1[i] = clamp_prob(raw_pi, eps);
    if (eval.pi1[i] != raw_pi) ++eval.clip_count;

    switch (nuisances.g_source.kind) {
      case GSource::Kind::PlugIn:
        eval.g1[i] = nuisances.g_plugin[static_cast<std::size_t>(f)]
                         .g_at(row, &eval.clip_count)
                         .first;
        break;
      case GSource::Kind::Auxiliary:
        eval.g1[i] = nuisances.g_source.aux.g_at(row, &eval.clip_count).first;
        break;
      case GSource::Kind::Oracle: {
        // Oracle g is a function of the raw covariates, not the feature map.
        const double g1 = nuisances.g_source.g1_oracle(data.x.row(i).transpose());
        eval.g1[i] = clamp_prob(g1, eps);
        if (eval.g1[i] != g1) ++eval.clip_count;
        break;
      }
    }
  }
  return eval;
}

CcNuisanceEval evaluate_nuisances(const CaseControlData& data,
                                  const FoldNuisancesCC& nuisances) {
  const Mat feat_t = expand(data.x_treated, nuisances.options);
  const Mat feat_u = expand(data.x_unlabeled, nuisances.options);
  const double eps = nuisances.options.clip_eps;
  const ESource& es = nuisances.e_source;

  CcNuisanceEval eval;
  eval.mu_t_treated.resize(data.m());
  eval.e1_treated.resize(data.m());
  eval.ratio_treated.resize(data.m());
  eval.mu_t_unlabeled.resize(data.l());
  eval.mu_u_unlabeled.resize(data.l());
  eval.e1_unlabeled.resize(data.l());

  auto eval_e1 = [&](const Vec& raw_row, const Vec& feat_row, int fold,
                     double* ratio) -> double {
    if (es.kind == ESource::Kind::Oracle) {
      const double raw = es.e1_oracle(raw_row);
      const double e1 = clamp_prob(raw, eps);
      if (e1 != raw) ++eval.clip_count;
      if (ratio != nullptr) *ratio = es.r_oracle(raw_row);
      return e1;
    }
    const auto& model = es.per_fold
                            ? nuisances.e_models[static_cast<std::size_t>(fold)]
                            : nuisances.e_models.front();
    const double raw = predict_proba_at(model.score_model, feat_row, 0.0);
    const double e1 = clamp_prob(raw, eps);
    if (e1 != raw) ++eval.clip_count;
    if (ratio != nullptr) {
      *ratio = std::min(model.class_prior / e1, 1.0 / eps);
    }
    return e1;
  };

  for (Eigen::Index j = 0; j < data.m(); ++j) {
    const int f = nuisances.treated_folds.fold_of[static_cast<std::size_t>(j)];
    const Vec row = feat_t.row(j).transpose();
    eval.mu_t_treated[j] =
        predict_mean_at(nuisances.mu_t[static_cast<std::size_t>(f)], row);
    double ratio = 1.0;
    eval.e1_treated[j] =
        eval_e1(data.x_treated.row(j).transpose(), row, f, &ratio);
    eval.ratio_treated[j] = ratio;
  }
  for (Eigen::Index k = 0; k < data.l(); ++k) {
    const int f = nuisances.unlabeled_folds.fold_of[static_cast<std::size_t>(k)];
    const Vec row = feat_u.row(k).transpose();
    eval.mu_t_unlabeled[k] =
        predict_mean_at(nuisances.mu_t[static_cast<std::size_t>(f)], row);
    eval.mu_u_unlabeled[k] =
        predict_mean_at(nuisances.mu_u[static_cast<std::size_t>(f)], row);
    eval.e1_unlabeled[k] =
        eval_e1(data.x_unlabeled.row(k).transpose(), row, f, nullptr);
  }
  return eval;
}

}  // namespace puate
