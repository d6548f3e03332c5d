#include "linearcl/learners.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "linearcl/rng.hpp"

namespace linearcl {

namespace {

constexpr double kDepTol = 1e-10;
constexpr double kCondWarnThreshold = 1e12;

Matrix feature_matrix(const LearnerState& state, const TaskDataset& task) {
  return state.map(task.features);
}

// Average per-sample squared-loss gradient over a batch, as a p x c matrix.
Matrix batch_loss_gradient(const FeatureMap& map, const Weights& w,
                           const std::vector<StoredSample>& batch) {
  Matrix g = Matrix::Zero(w.param_dim(), w.outputs());
  if (batch.empty()) return g;
  for (const StoredSample& s : batch) {
    Matrix x = s.x.transpose();  // 1 x q
    Matrix err = predict(map, w, x).row(0).transpose() - s.y;  // c
    g += map(x).row(0).transpose() * err.transpose();
  }
  return g / static_cast<double>(batch.size());
}

Matrix project_with(const Method method, const MemoryBasis& memory, const FeatureMap& map,
                    const Weights& weights, const Matrix& g,
                    const std::vector<StoredSample>* ref_batch) {
  switch (method) {
    case Method::sgd: return g;
    case Method::ogd:
    case Method::pca_ogd:
    case Method::gem_nt: {
      ComplementProjector t(memory.basis);
      return t.apply_cols(g);
    }
    case Method::a_gem: {
      if (ref_batch == nullptr || ref_batch->empty()) return g;
      Matrix g_ref = batch_loss_gradient(map, weights, *ref_batch);
      const double ref_sq = g_ref.squaredNorm();
      if (ref_sq == 0.0) return g;  // degenerate reference
      const double dot = (g_ref.array() * g.array()).sum();
      if (dot >= 0.0) return g;
      return g - (dot / ref_sq) * g_ref;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::sgd: return "sgd";
    case Method::ogd: return "ogd";
    case Method::pca_ogd: return "pca_ogd";
    case Method::gem_nt: return "gem_nt";
    case Method::a_gem: return "a_gem";
  }
  return "sgd";
}

Method parse_method(const std::string& name) {
  if (name == "sgd") return Method::sgd;
  if (name == "ogd") return Method::ogd;
  if (name == "pca_ogd") return Method::pca_ogd;
  if (name == "gem_nt") return Method::gem_nt;
  if (name == "a_gem") return Method::a_gem;
  throw std::invalid_argument("unknown method: " + name);
}

LearnerState make_learner(Method method, const FeatureMap& map, int outputs, double lambda,
                          const Hyper& hyper, std::uint64_t seed) {
  if (outputs < 1) throw std::invalid_argument("learner needs >= 1 outputs");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (hyper.mem_per_task < 0) throw std::invalid_argument("mem_per_task must be >= 0");
  if (hyper.pca_samples < 1) throw std::invalid_argument("pca_samples must be >= 1");
  LearnerState state;
  state.method = method;
  state.map = map;
  state.weights = Weights::zeros(map.param_dim(), outputs);
  state.per_task_optima = {state.weights};
  state.memory.basis = OrthonormalBasis(map.param_dim());
  state.lambda = lambda;
  state.hyper = hyper;
  state.seed = seed;
  return state;
}

Matrix residual_targets(const LearnerState& state, const TaskDataset& task) {
  if (task.task_id != state.tasks_trained + 1)
    throw std::invalid_argument("residual_targets: task must follow the last trained task");
  return task.labels - predict(state.map, state.per_task_optima.back(), task.features);
}

ComplementProjector method_projector(const LearnerState& state) {
  if (state.method == Method::sgd || state.method == Method::a_gem)
    return ComplementProjector();
  return ComplementProjector(state.memory.basis);
}

Weights solve_task_closed_form(const LearnerState& state, const TaskDataset& task,
                               SolveReport* report) {
  if (!(state.lambda > 0.0))
    throw std::invalid_argument("closed-form solve requires lambda > 0");
  if (state.method == Method::a_gem)
    throw std::invalid_argument("a_gem has no closed-form trajectory");

  const Matrix phi = feature_matrix(state, task);
  const ComplementProjector t = method_projector(state);
  const Matrix phi_eff = t.apply_rows(phi);
  const Matrix residual = residual_targets(state, task);

  const int n = task.samples();
  Matrix gram = phi_eff * phi_eff.transpose();
  gram.diagonal().array() += state.lambda;

  if (report != nullptr) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lo = std::max(es.eigenvalues()(0), 0.0);
    const double hi = es.eigenvalues()(n - 1);
    report->condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    report->cond_warning = report->condition_number > kCondWarnThreshold;
  }

  const Matrix z = Eigen::LLT<Matrix>(gram).solve(residual);
  Weights out = state.per_task_optima.back();
  out.values += phi_eff.transpose() * z;
  return out;
}

double max_admissible_lr(const LearnerState& state, const TaskDataset& task) {
  const Matrix phi = feature_matrix(state, task);
  const ComplementProjector t = method_projector(state);
  const Matrix phi_eff = t.apply_rows(phi);
  Matrix gram = phi_eff * phi_eff.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return 1.0 / (std::max(es.eigenvalues()(task.samples() - 1), 0.0) + state.lambda);
}

Weights train_task_gd(const LearnerState& state, const TaskDataset& task, GdReport* report) {
  const double lr_bound = max_admissible_lr(state, task);
  if (!(state.hyper.lr < lr_bound)) {
    std::ostringstream msg;
    msg << "learning rate " << state.hyper.lr << " violates the convergence bound; "
        << "admissible maximum is " << lr_bound;
    throw std::invalid_argument(msg.str());
  }

  const Matrix phi = feature_matrix(state, task);
  const Matrix& y = task.labels;
  const Matrix prev = state.per_task_optima.back().values;
  const ComplementProjector t = method_projector(state);
  const bool check_ortho = !t.empty() && report != nullptr;

  Weights w = state.per_task_optima.back();
  GdReport rep;
  for (int iter = 0; iter < state.hyper.max_iters; ++iter) {
    const Matrix err = phi * (w.values - w.origin) - y;
    Matrix grad = phi.transpose() * err + state.lambda * (w.values - prev);
    Matrix step = project_with(state.method, state.memory, state.map, w, grad,
                               &state.memory.raw_buffer);
    const double step_norm = step.norm();
    rep.iters = iter + 1;
    rep.final_gradient_norm = step_norm;
    if (check_ortho && step_norm > 0.0) {
      const Matrix inner = state.memory.basis.vectors().transpose() * step;
      rep.max_ortho_violation =
          std::max(rep.max_ortho_violation, inner.cwiseAbs().maxCoeff() / step_norm);
    }
    if (step_norm <= state.hyper.grad_tol) break;
    w.values -= state.hyper.lr * step;
  }
  if (report != nullptr) *report = rep;
  return w;
}

MemoryBasis update_memory(const LearnerState& state, const TaskDataset& task) {
  if (task.task_id != state.tasks_trained)
    throw std::invalid_argument("update_memory: expected the task that was just trained");

  MemoryBasis memory = state.memory;
  const int n = task.samples();
  const int d = state.hyper.mem_per_task;
  const int p = state.map.param_dim();

  switch (state.method) {
    case Method::sgd: break;

    case Method::ogd: {
      if (d == 0) break;
      SplitRng rng = SplitRng(state.seed).derive("ogd").derive(
          static_cast<std::uint64_t>(task.task_id));
      const int take = std::min(d, n);
      if (d > p - memory.basis.size())
        memory.warnings.push_back("ogd: budget exceeds remaining capacity at task " +
                                  std::to_string(task.task_id));
      const std::vector<int> rows = rng.sample_without_replacement(n, take);
      int idx = 0;
      for (int r : rows) {
        if (memory.basis.size() >= p) break;
        // Stored direction is the true-class output gradient, which for a
        // shared feature map is the feature row itself.
        Matrix x = task.features.row(r);
        Vector u = state.map(x).row(0).transpose();
        memory.basis.try_append(u, kDepTol, {task.task_id, idx++});
      }
      break;
    }

    case Method::pca_ogd: {
      if (d == 0) break;
      SplitRng rng = SplitRng(state.seed).derive("pca").derive(
          static_cast<std::uint64_t>(task.task_id));
      const bool exact = state.hyper.pca_samples >= n;
      Matrix sampled;
      if (exact) {
        sampled = task.features;  // all rows, original order
      } else {
        const std::vector<int> rows = rng.sample_without_replacement(n, state.hyper.pca_samples);
        sampled.resize(static_cast<int>(rows.size()), task.features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) sampled.row(static_cast<int>(i)) =
            task.features.row(rows[i]);
      }
      const SvdFactors svd = thin_svd(state.map(sampled));
      const int take = std::min(d, svd.rank());
      if (d > p - memory.basis.size())
        memory.warnings.push_back("pca_ogd: budget exceeds remaining capacity at task " +
                                  std::to_string(task.task_id));
      int covered = 0;
      for (int j = 0; j < take; ++j) {
        if (memory.basis.size() >= p) break;
        memory.basis.try_append(svd.right.col(j), kDepTol, {task.task_id, j});
        ++covered;  // stored or dependent: either way the direction is in the span
      }
      memory.pca_covered[task.task_id] = covered;
      memory.pca_exact[task.task_id] = exact;
      break;
    }

    case Method::gem_nt: {
      if (d == 0) break;
      SplitRng rng = SplitRng(state.seed).derive("gem").derive(
          static_cast<std::uint64_t>(task.task_id));
      const int take = std::min(d, n);
      const std::vector<int> rows = rng.sample_without_replacement(n, take);
      for (int r : rows)
        memory.raw_buffer.push_back(
            {task.features.row(r).transpose(), task.labels.row(r).transpose(), task.task_id});

      auto task_direction = [&](int tau) -> Vector {
        Vector g = Vector::Zero(p);
        int count = 0;
        for (const StoredSample& s : memory.raw_buffer) {
          if (s.task_id != tau) continue;
          Matrix x = s.x.transpose();
          const Matrix pred = predict(state.map, state.weights, x);
          int cls = 0;
          if (s.y.size() > 1) {
            for (int j = 0; j < s.y.size(); ++j)
              if (s.y(j) == 1.0) cls = j;
          }
          g += state.map(x).row(0).transpose() * (pred(0, cls) - s.y(cls));
          ++count;
        }
        if (count > 0) g /= static_cast<double>(count);
        return g;
      };

      if (state.hyper.refresh_gem_gradients) {
        // Rebuild every stored direction at the current weights.
        memory.basis = OrthonormalBasis(p);
        for (int tau = 1; tau <= task.task_id; ++tau)
          memory.basis.try_append(task_direction(tau), kDepTol, {tau, 0});
      } else {
        memory.basis.try_append(task_direction(task.task_id), kDepTol, {task.task_id, 0});
      }
      break;
    }

    case Method::a_gem: {
      if (d == 0) break;
      SplitRng rng = SplitRng(state.seed).derive("agem").derive(
          static_cast<std::uint64_t>(task.task_id));
      const int take = std::min(d, n);
      const std::vector<int> rows = rng.sample_without_replacement(n, take);
      for (int r : rows)
        memory.raw_buffer.push_back(
            {task.features.row(r).transpose(), task.labels.row(r).transpose(), task.task_id});
      break;
    }
  }
  return memory;
}

Matrix project_gradient(const LearnerState& state, const Matrix& g,
                        const std::vector<StoredSample>* ref_batch) {
  return project_with(state.method, state.memory, state.map, state.weights, g, ref_batch);
}

const TaskTrace& Trajectory::trace(int tau) const {
  if (tau < 1 || tau > static_cast<int>(tasks.size()))
    throw std::out_of_range("trajectory trace index out of range");
  return tasks[tau - 1];
}

Matrix Trajectory::optimum(int tau) const {
  if (tau == 0) return Matrix::Zero(tasks.empty() ? 0 : tasks[0].optimum.rows(), outputs);
  return trace(tau).optimum;
}

void train_task(LearnerState& state, const TaskDataset& task, TrainMode mode, TaskTrace* trace) {
  const Matrix residual = residual_targets(state, task);
  TaskTrace local;
  local.memory_before = state.memory.basis;
  local.residual = residual;

  Weights next;
  if (mode == TrainMode::closed_form) {
    SolveReport rep;
    next = solve_task_closed_form(state, task, &rep);
    local.condition_number = rep.condition_number;
    local.cond_warning = rep.cond_warning;
  } else {
    GdReport rep;
    next = train_task_gd(state, task, &rep);
    local.gd_iters = rep.iters;
    local.gd_final_gradient = rep.final_gradient_norm;
    local.max_ortho_violation = rep.max_ortho_violation;
  }

  state.weights = next;
  state.per_task_optima.push_back(next);
  state.tasks_trained += 1;
  state.memory = update_memory(state, task);
  local.optimum = next.values;
  if (trace != nullptr) *trace = std::move(local);
}

Trajectory train_sequence(Method method, const FeatureMap& map, const TaskSequence& seq,
                          double lambda, const Hyper& hyper, std::uint64_t seed, TrainMode mode) {
  validate(seq);
  if (method == Method::a_gem && mode == TrainMode::closed_form)
    throw std::invalid_argument("a_gem requires gradient-descent training");

  LearnerState state = make_learner(method, map, seq.label_dim(), lambda, hyper, seed);
  Trajectory traj;
  traj.method = method;
  traj.lambda = lambda;
  traj.hyper = hyper;
  traj.seed = seed;
  traj.outputs = seq.label_dim();

  for (const TaskDataset& task : seq.tasks) {
    TaskTrace trace;
    train_task(state, task, mode, &trace);
    if (trace.cond_warning)
      state.memory.warnings.push_back(
          "task " + std::to_string(task.task_id) + ": kernel system condition " +
          std::to_string(trace.condition_number) + " exceeds 1e12");
    traj.tasks.push_back(std::move(trace));
  }
  traj.pca_covered = state.memory.pca_covered;
  traj.pca_exact = state.memory.pca_exact;
  traj.warnings = state.memory.warnings;
  return traj;
}

}  // namespace linearcl
