// Copyright 2026 The ClaimLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLAIMLENS_LINEAR_H_
#define CLAIMLENS_LINEAR_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "claimlens/lexfeat.h"

namespace claimlens {

enum class LinearKind { kSvmHinge, kLogReg };
LinearKind ParseLinearKind(const std::string &name);  // svm | logreg
std::string LinearKindName(LinearKind kind);

struct LinearOptions {
  LinearKind kind = LinearKind::kLogReg;
  // Weight of the data term; the L2 penalty is 0.5 * |w|^2. The intercept
  // is not penalized.
  double C = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;
  uint64_t seed = 1;
};

// One-vs-rest linear classifier over sparse features. Columns from
// dense_begin() on are standardized with train-set statistics first.
class LinearModel {
 public:
  LinearKind kind() const { return kind_; }
  int num_classes() const { return static_cast<int>(weights_.rows()); }
  Eigen::Index dim() const { return weights_.cols(); }
  const Eigen::MatrixXd &weights() const { return weights_; }
  const Eigen::VectorXd &bias() const { return bias_; }
  Eigen::Index dense_begin() const { return dense_begin_; }

  // rows x classes.
  Eigen::MatrixXd DecisionFunction(const FeatureMatrix &x) const;
  std::vector<int> Predict(const FeatureMatrix &x) const;

  void Save(const std::string &prefix) const;  // .bin and .json
  static LinearModel Load(const std::string &prefix);

 private:
  friend LinearModel TrainLinear(const FeatureMatrix &, const std::vector<int> &,
                                 int, const LinearOptions &, Eigen::Index);
  // Applies the scaler to one row.
  SparseVector Prepare(const SparseVector &row) const;

  LinearKind kind_ = LinearKind::kLogReg;
  Eigen::MatrixXd weights_;  // classes x dim
  Eigen::VectorXd bias_;
  Eigen::Index dense_begin_ = 0;
  Eigen::VectorXd mean_;  // for the dense columns
  Eigen::VectorXd scale_;
};

// Labels in [0, num_classes); fewer than two distinct labels raise
// ArgumentError. A class absent from `y` gets a zero row and a bias of
// -1e9 so it is never predicted. dense_begin < 0 means no dense block.
LinearModel TrainLinear(const FeatureMatrix &x, const std::vector<int> &y,
                        int num_classes, const LinearOptions &options,
                        Eigen::Index dense_begin = -1);

}  // namespace claimlens

#endif  // CLAIMLENS_LINEAR_H_
