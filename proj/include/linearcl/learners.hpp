#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "linearcl/model.hpp"
#include "linearcl/tasks.hpp"

namespace linearcl {

enum class Method { sgd, ogd, pca_ogd, gem_nt, a_gem };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct Hyper {
  double lr = 1e-3;
  int max_iters = 200000;
  double grad_tol = 1e-10;  // absolute threshold on the projected gradient norm
  int mem_per_task = 10;    // d
  int pca_samples = 3000;   // s
  bool refresh_gem_gradients = false;
};

struct StoredSample {
  Vector x;
  Vector y;
  int task_id = 0;
};

struct MemoryBasis {
  OrthonormalBasis basis;
  std::vector<StoredSample> raw_buffer;  // gem_nt / a_gem sample storage
  std::map<int, int> pca_covered;        // task -> leading directions represented
  std::map<int, bool> pca_exact;         // task -> PCA ran on the full task matrix
  std::vector<std::string> warnings;
};

struct LearnerState {
  Method method = Method::sgd;
  FeatureMap map = FeatureMap::identity(1);
  Weights weights;
  std::vector<Weights> per_task_optima;  // omega*_0 (zeros) first
  MemoryBasis memory;
  double lambda = 1e-2;
  Hyper hyper;
  std::uint64_t seed = 0;
  int tasks_trained = 0;
};

LearnerState make_learner(Method method, const FeatureMap& map, int outputs, double lambda,
                          const Hyper& hyper, std::uint64_t seed);

// y_tau - f*_{tau-1}(X^tau); equals y_tau for the first task.
Matrix residual_targets(const LearnerState& state, const TaskDataset& task);

// The method's complement projector built from the current memory basis
// (empty for sgd and a_gem).
ComplementProjector method_projector(const LearnerState& state);

struct SolveReport {
  double condition_number = 1.0;
  bool cond_warning = false;
};

// omega*_{tau-1} + phi~^T (kappa~ + lambda I)^{-1} y~ per output column.
Weights solve_task_closed_form(const LearnerState& state, const TaskDataset& task,
                               SolveReport* report = nullptr);

struct GdReport {
  int iters = 0;
  double final_gradient_norm = 0.0;
  // max over steps and memory columns of |<step, v>| / ||step||
  double max_ortho_violation = 0.0;
};

// Largest admissible learning rate 1 / ||kappa~ + lambda I|| for this task.
double max_admissible_lr(const LearnerState& state, const TaskDataset& task);

// Full-batch projected gradient descent on the regularized squared loss,
// weight decay anchored at the previous task's optimum. Throws when the
// learning rate violates the admissible bound.
Weights train_task_gd(const LearnerState& state, const TaskDataset& task,
                      GdReport* report = nullptr);

// End-of-task memory update for the state's method; the returned basis
// replaces state.memory.
MemoryBasis update_memory(const LearnerState& state, const TaskDataset& task);

// Method projection of a p x c gradient; for a_gem the reference gradient is
// the average loss gradient over ref_batch at the state's current weights,
// and projection happens only on a negative dot product.
Matrix project_gradient(const LearnerState& state, const Matrix& g,
                        const std::vector<StoredSample>* ref_batch = nullptr);

enum class TrainMode { closed_form, gradient_descent };

struct TaskTrace {
  Matrix optimum;                 // p x c weights after the task
  OrthonormalBasis memory_before; // projector snapshot the task was trained under
  Matrix residual;                // y~ for the task
  int gd_iters = 0;
  double gd_final_gradient = 0.0;
  double max_ortho_violation = 0.0;
  double condition_number = 1.0;
  bool cond_warning = false;
};

struct Trajectory {
  Method method = Method::sgd;
  double lambda = 0.0;
  Hyper hyper;
  std::uint64_t seed = 0;
  int outputs = 1;
  std::vector<TaskTrace> tasks;
  std::map<int, int> pca_covered;
  std::map<int, bool> pca_exact;
  std::vector<std::string> warnings;

  const TaskTrace& trace(int tau) const;  // 1-based
  // omega*_tau values; tau = 0 gives the zero initial weights.
  Matrix optimum(int tau) const;
};

// Trains one task end to end: residuals, weights, memory, bookkeeping.
void train_task(LearnerState& state, const TaskDataset& task, TrainMode mode,
                TaskTrace* trace = nullptr);

Trajectory train_sequence(Method method, const FeatureMap& map, const TaskSequence& seq,
                          double lambda, const Hyper& hyper, std::uint64_t seed, TrainMode mode);

}  // namespace linearcl
