#include "puate/data.hpp"

#include "puate/errors.hpp"

namespace puate {

void CensoringDataset::validate() const {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(observed.size()) != n || y.size() != n) {
    throw InvalidInput("censoring dataset: column lengths differ");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw InvalidInput("censoring dataset: non-finite value");
  }
  for (int o : observed) {
    if (o != 0 && o != 1) {
      throw InvalidInput("censoring dataset: observation indicator not 0/1");
    }
  }
}

void CaseControlData::validate() const {
  if (x_treated.rows() < 1 || x_unlabeled.rows() < 1) {
    throw InvalidInput("case-control data: both samples must be non-empty");
  }
  if (y_treated.size() != x_treated.rows() ||
      y_unlabeled.size() != x_unlabeled.rows()) {
    throw InvalidInput("case-control data: outcome lengths differ");
  }
  if (x_treated.cols() != x_unlabeled.cols()) {
    throw InvalidInput("case-control data: covariate dimension mismatch");
  }
  if (!x_treated.allFinite() || !x_unlabeled.allFinite() ||
      !y_treated.allFinite() || !y_unlabeled.allFinite()) {
    throw InvalidInput("case-control data: non-finite value");
  }
}

}  // namespace puate
