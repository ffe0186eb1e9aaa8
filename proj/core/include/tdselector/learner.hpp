#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdselector/corpus.hpp"

namespace tdselector {

struct LogisticHyper {
  double ridge = 1e-8;
  /// Convergence threshold on the infinity norm of the gradient.
  double tol = 1e-8;
  std::size_t max_iter = 500;
};

struct TrainingMeta {
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double gradient_norm = 0.0;
  double ridge = 0.0;
  bool converged = false;
  /// Single-class training data: the model predicts the smoothed class prior.
  bool degenerate = false;
  /// Objective after every accepted step, starting with the initial point.
  std::vector<double> objective_trace;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  TrainingMeta meta;
};

/// Design matrix and labels for the regularized negative log-likelihood
///
///   f(w, b) = sum_i log(1 + exp(-y_i (w.x_i + b))) + ridge * |w|^2,   y_i in {-1, +1}
///
/// The bias is not penalized.
class LogisticObjective {
 public:
  LogisticObjective(std::span<const Instance> data, double ridge);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size(); }

  /// `params` holds the weights followed by the bias.
  double value(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
  /// Row-major (dim+1)x(dim+1).
  std::vector<double> hessian(std::span<const double> params) const;

 private:
  double margin(std::span<const double> params, std::size_t row) const;

  std::size_t dim_;
  double ridge_;
  std::vector<double> features_;  // row-major size() x (dim_ + 1), trailing 1 for the bias
  std::vector<double> labels_;    // 0 or 1
};

/// Damped Newton with Armijo backtracking from zero weights. Only metrics are
/// features; defect counts never enter the model.
LogisticModel train(std::span<const Instance> tds, const LogisticHyper& hyper = {});

struct Prediction {
  InstanceId instance;
  double probability = 0.5;
};

/// Throws DimensionError on a metric-count mismatch.
Prediction predict_proba(const LogisticModel& model, const Instance& instance);
std::vector<Prediction> predict_proba(const LogisticModel& model, std::span<const Instance> instances);

/// Probability of a correctly ordered (positive, negative) pair, ties counted
/// half. Throws UndefinedAucError unless both classes are present, and
/// DimensionError on a length mismatch.
double auc(std::span<const double> scores, std::span<const int> labels);
double auc(std::span<const Prediction> predictions, std::span<const int> labels);

/// Train on `tds` and return the AUC on `test`.
double evaluate_auc(std::span<const Instance> tds, std::span<const Instance> test,
                    const LogisticHyper& hyper = {});

}  // namespace tdselector
