#include "tdselector/learner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tdselector/error.hpp"

namespace tdselector {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double inf_norm(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

}  // namespace

// features_ holds each row followed by a constant 1 for the bias, so a row is
// dim_ + 1 wide.
LogisticObjective::LogisticObjective(std::span<const Instance> data, double ridge)
    : dim_(data.empty() ? 0 : data.front().metrics.size()), ridge_(ridge) {
  if (data.empty()) throw ValidationError("cannot fit a model to an empty training set");
  if (ridge < 0.0) throw ConfigError("ridge must be non-negative");
  features_.reserve(data.size() * (dim_ + 1));
  labels_.reserve(data.size());
  for (const auto& inst : data) {
    if (inst.metrics.size() != dim_) {
      throw DimensionError("instance " + inst.id.str() + " has " + std::to_string(inst.metrics.size()) +
                           " metrics, expected " + std::to_string(dim_));
    }
    features_.insert(features_.end(), inst.metrics.begin(), inst.metrics.end());
    features_.push_back(1.0);
    labels_.push_back(static_cast<double>(inst.label()));
  }
}

double LogisticObjective::margin(std::span<const double> params, std::size_t row) const {
  const double* x = features_.data() + row * (dim_ + 1);
  double z = 0.0;
  for (std::size_t j = 0; j <= dim_; ++j) z += x[j] * params[j];
  return z;
}

double LogisticObjective::value(std::span<const double> params) const {
  if (params.size() != dim_ + 1) throw DimensionError("parameter vector has the wrong length");
  double f = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double z = margin(params, i);
    f += softplus(z) - labels_[i] * z;
  }
  for (std::size_t j = 0; j < dim_; ++j) f += ridge_ * params[j] * params[j];
  return f;
}

std::vector<double> LogisticObjective::gradient(std::span<const double> params) const {
  if (params.size() != dim_ + 1) throw DimensionError("parameter vector has the wrong length");
  std::vector<double> g(dim_ + 1, 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double r = sigmoid(margin(params, i)) - labels_[i];
    const double* x = features_.data() + i * (dim_ + 1);
    for (std::size_t j = 0; j <= dim_; ++j) g[j] += r * x[j];
  }
  for (std::size_t j = 0; j < dim_; ++j) g[j] += 2.0 * ridge_ * params[j];
  return g;
}

std::vector<double> LogisticObjective::hessian(std::span<const double> params) const {
  if (params.size() != dim_ + 1) throw DimensionError("parameter vector has the wrong length");
  const auto p = static_cast<Eigen::Index>(dim_ + 1);
  const auto n = static_cast<Eigen::Index>(labels_.size());
  Eigen::Map<const RowMatrix> x(features_.data(), n, p);
  Eigen::Map<const Eigen::VectorXd> theta(params.data(), p);
  const Eigen::VectorXd z = x * theta;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = sigmoid(z[i]);
    w[i] = s * (1.0 - s);
  }
  Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
  for (Eigen::Index j = 0; j + 1 < p; ++j) h(j, j) += 2.0 * ridge_;
  std::vector<double> out(static_cast<std::size_t>(p * p));
  Eigen::Map<RowMatrix>(out.data(), p, p) = h;
  return out;
}

LogisticModel train(std::span<const Instance> tds, const LogisticHyper& hyper) {
  if (!(hyper.tol > 0.0)) throw ConfigError("tolerance must be positive");
  LogisticObjective objective(tds, hyper.ridge);
  const std::size_t dim = objective.dimension();

  LogisticModel model;
  model.weights.assign(dim, 0.0);
  model.meta.ridge = hyper.ridge;

  const auto positives = static_cast<std::size_t>(
      std::count_if(tds.begin(), tds.end(), [](const Instance& i) { return i.label() == 1; }));
  if (positives == 0 || positives == tds.size()) {
    // Laplace-smoothed prior keeps the constant prediction on the side of the
    // observed class.
    const double prior = (static_cast<double>(positives) + 1.0) / (static_cast<double>(tds.size()) + 2.0);
    model.bias = std::log(prior / (1.0 - prior));
    model.meta.degenerate = true;
    std::vector<double> params(dim + 1, 0.0);
    params[dim] = model.bias;
    model.meta.final_objective = objective.value(params);
    model.meta.gradient_norm = inf_norm(objective.gradient(params));
    model.meta.objective_trace.push_back(model.meta.final_objective);
    return model;
  }

  const auto p = static_cast<Eigen::Index>(dim + 1);
  std::vector<double> params(dim + 1, 0.0);
  std::vector<double> trial(dim + 1);
  double f = objective.value(params);
  model.meta.objective_trace.push_back(f);

  std::size_t iter = 0;
  double gnorm = 0.0;
  for (;; ++iter) {
    const std::vector<double> g = objective.gradient(params);
    gnorm = inf_norm(g);
    if (gnorm < hyper.tol) {
      model.meta.converged = true;
      break;
    }
    if (iter >= hyper.max_iter) break;

    const std::vector<double> h = objective.hessian(params);
    Eigen::Map<const RowMatrix> hm(h.data(), p, p);
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hm);
    Eigen::VectorXd dir;
    bool newton = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (newton) {
      dir = ldlt.solve(-gv);
      newton = dir.allFinite() && dir.dot(gv) < 0.0;
    }
    if (!newton) dir = -gv;

    const double slope = dir.dot(gv);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      for (std::size_t j = 0; j <= dim; ++j) trial[j] = params[j] + step * dir[static_cast<Eigen::Index>(j)];
      const double ft = objective.value(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
        if (ft < f) {
          params.swap(trial);
          f = ft;
          accepted = true;
        }
        break;
      }
    }
    if (!accepted) break;
    model.meta.objective_trace.push_back(f);
  }

  model.meta.iterations = iter;
  model.meta.final_objective = f;
  model.meta.gradient_norm = gnorm;
  std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(dim), model.weights.begin());
  model.bias = params[dim];
  return model;
}

Prediction predict_proba(const LogisticModel& model, const Instance& instance) {
  if (instance.metrics.size() != model.weights.size()) {
    throw DimensionError("instance " + instance.id.str() + " has " + std::to_string(instance.metrics.size()) +
                         " metrics, model expects " + std::to_string(model.weights.size()));
  }
  double z = model.bias;
  for (std::size_t j = 0; j < model.weights.size(); ++j) z += model.weights[j] * instance.metrics[j];
  return Prediction{instance.id, sigmoid(z)};
}

std::vector<Prediction> predict_proba(const LogisticModel& model, std::span<const Instance> instances) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(predict_proba(model, inst));
  return out;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw ValidationError("score is NaN");
    positives += static_cast<std::uint64_t>(labels[i]);
  }
  const std::uint64_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw UndefinedAucError("AUC needs both defective and clean instances");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney count: 2 per concordant pair, 1 per tied pair.
  std::uint64_t doubled = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++pos; else ++neg;
      ++j;
    }
    doubled += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    i = j;
  }
  return static_cast<double>(doubled) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double auc(std::span<const Prediction> predictions, std::span<const int> labels) {
  std::vector<double> scores;
  scores.reserve(predictions.size());
  for (const auto& p : predictions) scores.push_back(p.probability);
  return auc(scores, labels);
}

double evaluate_auc(std::span<const Instance> tds, std::span<const Instance> test, const LogisticHyper& hyper) {
  const LogisticModel model = train(tds, hyper);
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& inst : test) {
    scores.push_back(predict_proba(model, inst).probability);
    labels.push_back(inst.label());
  }
  return auc(scores, labels);
}

}  // namespace tdselector
