#pragma once

#include <limits>
#include <map>
#include <vector>

#include "linearcl/learners.hpp"

namespace linearcl {

struct DriftRecord {
  int source = 0;
  int target = 0;
  Vector drift;  // prediction change on the source data, true-class column
  double cf = 0.0;
  double cf_closed_form = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::map<int, Vector> overlap_singulars;  // per summand k
  std::vector<double> term_norms;           // per summand ||U S O M y~||
};

// phi(X^source)(w_target - w_source), true-class column per row.
Vector drift(const FeatureMap& map, const Weights& w_source, const Weights& w_target,
             const TaskDataset& source_task);

// Closed-form drift/CF evaluation over a recorded trajectory. The memory
// schedule is replayed from the trajectory snapshots so analysis and training
// share identical projectors. SVDs of phi(X^tau) are cached per task.
class ForgettingAnalyzer {
 public:
  ForgettingAnalyzer(const FeatureMap& map, const TaskSequence& seq, const Trajectory& traj,
                     bool normalize_drift = false);

  Vector drift(int tau_s, int tau_t) const;
  double cf(int tau_s, int tau_t) const;

  // Summed SVD form of the forgetting via overlap matrices; exact match with cf() is
  // the telescoping identity. Throws for a_gem trajectories.
  double cf_closed_form(int tau_s, int tau_t, std::vector<double>* term_norms = nullptr) const;

  // O^{tau_s -> tau_t} = V_s^T T_{tau_t - 1} V_t, built through the
  // complement projector.
  Matrix overlap_matrix(int tau_s, int tau_t) const;
  Vector overlap_singular_values(int tau_s, int tau_t) const;

  // Principal-angle upper bound; per-summand bounds are combined as the
  // square of their sum so dominance over cf_closed_form is guaranteed.
  double cf_bound(int tau_s, int tau_t) const;

  DriftRecord record(int tau_s, int tau_t) const;

  const SvdFactors& svd_of(int tau) const;

  // Conditioning warnings collected from the per-summand kernel solves.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  // U_s S_s O^{tau_s -> k} M_k y~_k, n_s x c.
  Matrix summand_term(int tau_s, int k) const;
  const Matrix& rotated_residual(int k) const;
  ComplementProjector projector_before(int k) const;
  Vector select_true_class(const Matrix& values, int tau) const;
  void check_pair(int tau_s, int tau_t) const;
  bool has_theory() const { return traj_.method != Method::a_gem; }

  const FeatureMap& map_;
  const TaskSequence& seq_;
  const Trajectory& traj_;
  bool normalize_;
  mutable std::vector<SvdFactors> svd_cache_;
  mutable std::vector<bool> svd_ready_;
  mutable std::vector<Matrix> my_cache_;
  mutable std::vector<bool> my_ready_;
  mutable std::vector<std::string> warnings_;
};

struct SpectrumRow {
  Method method = Method::sgd;
  int memory = 0;
  int index = 0;  // 0-based position in the descending spectrum
  double singular_value = 0.0;
};

// Singular values of O^{1->2} for each memory size; the learner is retrained
// per size with the closed-form path (gradient descent for a_gem).
std::vector<SpectrumRow> spectrum_report(Method method, const FeatureMap& map,
                                         const TaskSequence& seq,
                                         const std::vector<int>& memory_sizes, double lambda,
                                         Hyper hyper, std::uint64_t seed);

}  // namespace linearcl
