#pragma once

#include <vector>

#include "puate/mathutil.hpp"

namespace puate {

// Single-sample observations: covariates, observation indicator, outcome.
// Units with observed == 1 are confirmed treated; units with observed == 0
// are an unresolved mixture of treated and control.
struct CensoringDataset {
  Mat x;                      // n x p raw covariates
  std::vector<int> observed;  // O in {0, 1}
  Vec y;

  Eigen::Index size() const { return x.rows(); }
  void validate() const;
};

// Two stratified samples: a pure treated sample and an unlabeled mixture.
struct CaseControlData {
  Mat x_treated;  // m x p
  Vec y_treated;  // outcomes under treatment
  Mat x_unlabeled;  // l x p
  Vec y_unlabeled;

  Eigen::Index m() const { return x_treated.rows(); }
  Eigen::Index l() const { return x_unlabeled.rows(); }
  double alpha() const {
    return static_cast<double>(m()) / static_cast<double>(m() + l());
  }
  void validate() const;
};

}  // namespace puate
