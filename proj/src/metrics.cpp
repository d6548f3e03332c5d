#include "linearcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace linearcl {

std::string to_string(EvalKind kind) {
  return kind == EvalKind::accuracy ? "accuracy" : "neg_loss";
}

EvalKind parse_eval_kind(const std::string& name) {
  if (name == "accuracy") return EvalKind::accuracy;
  if (name == "neg_loss") return EvalKind::neg_loss;
  throw std::invalid_argument("unknown eval kind: " + name);
}

EvalMatrix EvalMatrix::empty(int tasks, EvalKind kind) {
  EvalMatrix e;
  e.values = Matrix::Constant(tasks, tasks, std::numeric_limits<double>::quiet_NaN());
  e.kind = kind;
  return e;
}

double average_accuracy(const EvalMatrix& e) {
  const int t = e.tasks();
  if (t < 1) throw std::invalid_argument("average_accuracy: empty matrix");
  double sum = 0.0;
  for (int tau = 1; tau <= t; ++tau) {
    const double v = e.at(t, tau);
    if (std::isnan(v)) throw std::invalid_argument("average_accuracy: final row incomplete");
    sum += v;
  }
  return sum / t;
}

double forgetting_measure(const EvalMatrix& e) {
  const int t = e.tasks();
  if (t < 2) throw std::invalid_argument("forgetting_measure: needs at least two tasks");
  double sum = 0.0;
  for (int tau = 1; tau <= t - 1; ++tau) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int l = tau; l <= t; ++l) {
      const double v = e.at(l, tau);
      if (std::isnan(v)) throw std::invalid_argument("forgetting_measure: missing entry");
      peak = std::max(peak, v);
    }
    sum += peak - e.at(t, tau);
  }
  return sum / (t - 1);
}

double evaluate(const FeatureMap& map, const Weights& w, const TaskDataset& task, EvalKind kind) {
  const Matrix pred = predict(map, w, task.features);
  const int n = task.samples();
  if (kind == EvalKind::accuracy) {
    int correct = 0;
    for (int i = 0; i < n; ++i) {
      int pa = 0;
      int la = 0;
      pred.row(i).maxCoeff(&pa);
      task.labels.row(i).maxCoeff(&la);
      if (pa == la) ++correct;
    }
    return static_cast<double>(correct) / n;
  }
  return -(pred - task.labels).rowwise().squaredNorm().mean();
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("spearman: need two equally sized samples");
  const std::vector<double> ra = ranks_with_ties(a);
  const std::vector<double> rb = ranks_with_ties(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace linearcl
