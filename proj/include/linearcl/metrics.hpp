#pragma once

#include <string>
#include <vector>

#include "linearcl/model.hpp"
#include "linearcl/tasks.hpp"

namespace linearcl {

enum class EvalKind { accuracy, neg_loss };

std::string to_string(EvalKind kind);
EvalKind parse_eval_kind(const std::string& name);

// Entry (l, tau) holds a_{l,tau}, task tau measured after training task l;
// cells with tau > l stay NaN.
struct EvalMatrix {
  Matrix values;
  EvalKind kind = EvalKind::neg_loss;

  static EvalMatrix empty(int tasks, EvalKind kind);
  int tasks() const { return static_cast<int>(values.rows()); }
  double& at(int l, int tau) { return values(l - 1, tau - 1); }
  double at(int l, int tau) const { return values(l - 1, tau - 1); }
};

// A_T: mean of the final row.
double average_accuracy(const EvalMatrix& e);

// F_T: mean over tau < T of max_{l = tau..T} a_{l,tau} - a_{T,tau}.
double forgetting_measure(const EvalMatrix& e);

// accuracy: fraction of argmax-correct rows; neg_loss: minus the mean squared
// error per sample.
double evaluate(const FeatureMap& map, const Weights& w, const TaskDataset& task, EvalKind kind);

// Spearman rank correlation with average ranks on ties.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace linearcl
