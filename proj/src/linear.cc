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

#include "claimlens/linear.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/tools/minima.hpp>
#include <ceres/ceres.h>
#include <nlohmann/json.hpp>

#include "claimlens/errors.h"
#include "claimlens/random.h"
#include "claimlens/tensor_io.h"
#include "claimlens/text.h"

namespace claimlens {

LinearKind ParseLinearKind(const std::string &name) {
  if (name == "svm" || name == "SVM_HINGE") return LinearKind::kSvmHinge;
  if (name == "logreg" || name == "LOGREG") return LinearKind::kLogReg;
  throw ArgumentError("unknown linear model kind '" + name + "'");
}

std::string LinearKindName(LinearKind kind) {
  return kind == LinearKind::kSvmHinge ? "svm" : "logreg";
}

namespace {

constexpr double kAbsentBias = -1e9;

double Dot(const SparseVector &x, const double *w) {
  double s = 0.0;
  for (const auto &[i, v] : x.entries()) s += w[i] * v;
  return s;
}

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// C * sum softplus(-y z) + 0.5 |w|^2 over parameters [w, b].
class LogisticObjective : public ceres::FirstOrderFunction {
 public:
  LogisticObjective(const std::vector<SparseVector> &rows,
                    const std::vector<double> &signs, double c, int dim)
      : rows_(rows), signs_(signs), c_(c), dim_(dim) {}

  bool Evaluate(const double *params, double *cost,
                double *gradient) const override {
    const double b = params[dim_];
    double f = 0.0;
    for (int j = 0; j < dim_; ++j) f += 0.5 * params[j] * params[j];
    if (gradient) {
      for (int j = 0; j < dim_; ++j) gradient[j] = params[j];
      gradient[dim_] = 0.0;
    }
    for (size_t i = 0; i < rows_.size(); ++i) {
      const double margin = signs_[i] * (Dot(rows_[i], params) + b);
      f += c_ * Softplus(-margin);
      if (gradient) {
        const double g = -c_ * signs_[i] * Sigmoid(-margin);
        for (const auto &[j, v] : rows_[i].entries()) gradient[j] += g * v;
        gradient[dim_] += g;
      }
    }
    *cost = f;
    return std::isfinite(f);
  }

  int NumParameters() const override { return dim_ + 1; }

 private:
  const std::vector<SparseVector> &rows_;
  const std::vector<double> &signs_;
  double c_;
  int dim_;
};

void TrainLogistic(const std::vector<SparseVector> &rows,
                   const std::vector<double> &signs, int dim,
                   const LinearOptions &options, Eigen::VectorXd *w, double *b) {
  std::vector<double> params(dim + 1, 0.0);
  ceres::GradientProblem problem(
      new LogisticObjective(rows, signs, options.C, dim));
  ceres::GradientProblemSolver::Options solver;
  solver.line_search_direction_type = ceres::LBFGS;
  solver.max_num_iterations = options.max_iterations;
  solver.function_tolerance = 1e-12;
  solver.gradient_tolerance = options.tolerance * 1e-3;
  solver.parameter_tolerance = 1e-12;
  solver.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(solver, problem, params.data(), &summary);
  if (summary.termination_type == ceres::FAILURE) {
    throw Error("logistic regression solver failed: " + summary.message);
  }
  *w = Eigen::Map<Eigen::VectorXd>(params.data(), dim);
  *b = params[dim];
}

// Hinge SVM with an unpenalized intercept. For a fixed intercept the dual
// is a box-constrained QP solved by coordinate descent; the primal optimum
// is convex in the intercept, which is found by Brent's method.
void TrainHinge(const std::vector<SparseVector> &rows,
                const std::vector<double> &signs, int dim,
                const LinearOptions &options, Eigen::VectorXd *w_out,
                double *b_out) {
  const size_t n = rows.size();
  const double c = options.C;
  std::vector<double> q(n);
  double max_norm = 0.0;
  for (size_t i = 0; i < n; ++i) {
    q[i] = 0.0;
    for (const auto &[j, v] : rows[i].entries()) q[i] += v * v;
    max_norm = std::max(max_norm, std::sqrt(q[i]));
  }
  std::vector<double> alpha(n, 0.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Rng rng(options.seed);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  auto solve_dual = [&](double b) {
    for (int pass = 0; pass < options.max_iterations; ++pass) {
      rng.Shuffle(order);
      double pg_max = -INFINITY, pg_min = INFINITY;
      for (size_t i : order) {
        const double g = signs[i] * (Dot(rows[i], w.data()) + b) - 1.0;
        double pg = g;
        if (alpha[i] <= 0) pg = std::min(g, 0.0);
        if (alpha[i] >= c) pg = std::max(g, 0.0);
        pg_max = std::max(pg_max, pg);
        pg_min = std::min(pg_min, pg);
        if (pg == 0.0) continue;
        const double old = alpha[i];
        alpha[i] = q[i] > 0 ? std::clamp(old - g / q[i], 0.0, c) : (g < 0 ? c : 0.0);
        const double delta = (alpha[i] - old) * signs[i];
        if (delta != 0.0) {
          for (const auto &[j, v] : rows[i].entries()) w[j] += delta * v;
        }
      }
      if (pg_max - pg_min < options.tolerance) break;
    }
  };
  auto primal = [&](double b) {
    solve_dual(b);
    double loss = 0.5 * w.squaredNorm();
    for (size_t i = 0; i < n; ++i) {
      loss += c * std::max(0.0, 1.0 - signs[i] * (Dot(rows[i], w.data()) + b));
    }
    return loss;
  };
  // |w| <= sqrt(2 C n) at the optimum, so |b| <= 1 + sqrt(2 C n) max|x|.
  const double bound =
      1.0 + std::sqrt(2.0 * c * static_cast<double>(n)) * max_norm + 1e-9;
  boost::uintmax_t iterations = 200;
  const auto best = boost::math::tools::brent_find_minima(primal, -bound, bound,
                                                          40, iterations);
  primal(best.first);
  *w_out = w;
  *b_out = best.first;
}

}  // namespace

SparseVector LinearModel::Prepare(const SparseVector &row) const {
  if (static_cast<Eigen::Index>(row.dim()) != dim()) {
    throw ArgumentError("feature row has " + std::to_string(row.dim()) +
                        " columns, model expects " + std::to_string(dim()));
  }
  if (mean_.size() == 0) return row;
  std::vector<SparseVector::Entry> entries;
  Eigen::VectorXd dense = mean_;
  dense.setZero();
  for (const auto &[i, v] : row.entries()) {
    if (static_cast<Eigen::Index>(i) < dense_begin_) {
      entries.emplace_back(i, v);
    } else {
      dense[i - dense_begin_] = v;
    }
  }
  for (Eigen::Index k = 0; k < dense.size(); ++k) {
    const double z = (dense[k] - mean_[k]) / scale_[k];
    if (z != 0.0) entries.emplace_back(static_cast<uint32_t>(dense_begin_ + k), z);
  }
  return SparseVector(row.dim(), std::move(entries));
}

Eigen::MatrixXd LinearModel::DecisionFunction(const FeatureMatrix &x) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.size()), num_classes());
  for (size_t r = 0; r < x.size(); ++r) {
    const SparseVector row = Prepare(x.rows[r]);
    for (int k = 0; k < num_classes(); ++k) {
      double s = bias_[k];
      for (const auto &[i, v] : row.entries()) s += weights_(k, i) * v;
      out(static_cast<Eigen::Index>(r), k) = s;
    }
  }
  return out;
}

std::vector<int> LinearModel::Predict(const FeatureMatrix &x) const {
  const Eigen::MatrixXd scores = DecisionFunction(x);
  std::vector<int> out(scores.rows());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index arg;
    scores.row(r).maxCoeff(&arg);
    out[r] = static_cast<int>(arg);
  }
  return out;
}

void LinearModel::Save(const std::string &prefix) const {
  TensorBundle bundle;
  bundle.Put("linear.weights", weights_);
  bundle.PutVector("linear.bias", bias_);
  if (mean_.size() > 0) {
    bundle.PutVector("linear.scaler_mean", mean_);
    bundle.PutVector("linear.scaler_scale", scale_);
  }
  bundle.Write(prefix + ".bin");
  nlohmann::json meta = {{"type", "linear"},
                         {"kind", LinearKindName(kind_)},
                         {"classes", num_classes()},
                         {"dim", dim()},
                         {"dense_begin", mean_.size() ? dense_begin_ : -1}};
  WriteFile(prefix + ".json", meta.dump(2) + "\n");
}

LinearModel LinearModel::Load(const std::string &prefix) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFile(prefix + ".json"));
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(prefix + ".json: " + e.what());
  }
  if (meta.value("type", "") != "linear") {
    throw FormatError(prefix + ".json is not a linear model");
  }
  const TensorBundle bundle = TensorBundle::Read(prefix + ".bin");
  LinearModel m;
  m.kind_ = ParseLinearKind(meta.at("kind").get<std::string>());
  const Eigen::Index classes = meta.at("classes").get<Eigen::Index>();
  const Eigen::Index dim = meta.at("dim").get<Eigen::Index>();
  m.weights_ = bundle.Get("linear.weights", classes, dim);
  m.bias_ = bundle.GetVector("linear.bias", classes);
  const Eigen::Index dense_begin = meta.at("dense_begin").get<Eigen::Index>();
  if (dense_begin >= 0) {
    m.dense_begin_ = dense_begin;
    m.mean_ = bundle.GetVector("linear.scaler_mean", dim - dense_begin);
    m.scale_ = bundle.GetVector("linear.scaler_scale", dim - dense_begin);
  }
  return m;
}

LinearModel TrainLinear(const FeatureMatrix &x, const std::vector<int> &y,
                        int num_classes, const LinearOptions &options,
                        Eigen::Index dense_begin) {
  if (x.size() != y.size()) throw ArgumentError("features and labels differ in length");
  if (options.C <= 0) throw ArgumentError("C must be positive");
  std::set<int> present;
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw ArgumentError("label " + std::to_string(label) + " out of range");
    }
    present.insert(label);
  }
  if (present.size() < 2) throw ArgumentError("training labels hold a single class");
  const int dim = static_cast<int>(x.cols);
  if (dense_begin > dim) throw ArgumentError("dense_begin beyond feature dim");

  LinearModel model;
  model.kind_ = options.kind;
  model.weights_ = Eigen::MatrixXd::Zero(num_classes, dim);
  model.bias_ = Eigen::VectorXd::Constant(num_classes, kAbsentBias);
  if (dense_begin >= 0 && dense_begin < dim) {
    model.dense_begin_ = dense_begin;
    std::vector<Eigen::VectorXd> block;
    for (const auto &row : x.rows) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dim - dense_begin);
      for (const auto &[i, v] : row.entries()) {
        if (static_cast<Eigen::Index>(i) >= dense_begin) d[i - dense_begin] = v;
      }
      block.push_back(std::move(d));
    }
    DenseScaler scaler;
    scaler.Fit(block);
    model.mean_ = scaler.mean();
    model.scale_ = scaler.scale();
  } else {
    model.dense_begin_ = dim;
  }
  std::vector<SparseVector> rows;
  rows.reserve(x.size());
  for (const auto &row : x.rows) {
    if (row.dim() != x.cols) throw ArgumentError("ragged feature matrix");
    rows.push_back(model.Prepare(row));
  }
  std::vector<double> signs(y.size());
  for (int k = 0; k < num_classes; ++k) {
    if (!present.count(k)) continue;
    for (size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == k ? 1.0 : -1.0;
    Eigen::VectorXd w;
    double b = 0.0;
    LinearOptions per_class = options;
    per_class.seed = DeriveSeed(options.seed, k);
    if (options.kind == LinearKind::kLogReg) {
      TrainLogistic(rows, signs, dim, per_class, &w, &b);
    } else {
      TrainHinge(rows, signs, dim, per_class, &w, &b);
    }
    model.weights_.row(k) = w.transpose();
    model.bias_[k] = b;
  }
  return model;
}

}  // namespace claimlens
