#include "linearcl/forgetting.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace linearcl {

namespace {

int one_hot_index(const Matrix& labels, int row) {
  if (labels.cols() == 1) return 0;
  for (int j = 0; j < labels.cols(); ++j)
    if (labels(row, j) == 1.0) return j;
  throw std::invalid_argument("label row is not one-hot");
}

// Largest singular value of V^T X, where X X^T = T, via eig(V^T T V).
double top_projected_cosine(const Matrix& v, const ComplementProjector& t) {
  if (v.cols() == 0) return 0.0;
  const Matrix g = v.transpose() * t.apply_cols(v);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues()(g.rows() - 1);
  return std::sqrt(std::min(1.0, std::max(0.0, top)));
}

}  // namespace

Vector drift(const FeatureMap& map, const Weights& w_source, const Weights& w_target,
             const TaskDataset& source_task) {
  const Matrix delta = map(source_task.features) * (w_target.values - w_source.values);
  Vector out(delta.rows());
  for (int i = 0; i < delta.rows(); ++i) out(i) = delta(i, one_hot_index(source_task.labels, i));
  return out;
}

ForgettingAnalyzer::ForgettingAnalyzer(const FeatureMap& map, const TaskSequence& seq,
                                       const Trajectory& traj, bool normalize_drift)
    : map_(map), seq_(seq), traj_(traj), normalize_(normalize_drift) {
  if (static_cast<int>(traj.tasks.size()) != seq.size())
    throw std::invalid_argument("trajectory does not cover the task sequence");
  svd_cache_.resize(seq.size());
  svd_ready_.assign(seq.size(), false);
  my_cache_.resize(seq.size());
  my_ready_.assign(seq.size(), false);
}

const SvdFactors& ForgettingAnalyzer::svd_of(int tau) const {
  if (tau < 1 || tau > seq_.size()) throw std::out_of_range("task index out of range");
  if (!svd_ready_[tau - 1]) {
    svd_cache_[tau - 1] = thin_svd(map_(seq_.task(tau).features));
    svd_ready_[tau - 1] = true;
  }
  return svd_cache_[tau - 1];
}

// M_k y~_k = S_k U_k^T (kappa~_k + lambda I)^{-1} y~_k; depends on k only.
const Matrix& ForgettingAnalyzer::rotated_residual(int k) const {
  if (!my_ready_[k - 1]) {
    const SvdFactors& tgt = svd_of(k);
    const ComplementProjector t = projector_before(k);
    const Matrix phi_eff = t.apply_rows(map_(seq_.task(k).features));
    Matrix gram = phi_eff * phi_eff.transpose();
    gram.diagonal().array() += traj_.lambda;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lo = std::max(es.eigenvalues()(0), 0.0);
    const double cond = lo > 0.0 ? es.eigenvalues()(gram.rows() - 1) / lo
                                 : std::numeric_limits<double>::infinity();
    if (cond > 1e12)
      warnings_.push_back("summand " + std::to_string(k) + ": kernel system condition " +
                          std::to_string(cond) + " exceeds 1e12");
    const Matrix z = Eigen::LLT<Matrix>(gram).solve(traj_.trace(k).residual);
    my_cache_[k - 1] = tgt.singulars.asDiagonal() * (tgt.left.transpose() * z);
    my_ready_[k - 1] = true;
  }
  return my_cache_[k - 1];
}

ComplementProjector ForgettingAnalyzer::projector_before(int k) const {
  if (traj_.method == Method::sgd || traj_.method == Method::a_gem)
    return ComplementProjector();
  return ComplementProjector(traj_.trace(k).memory_before);
}

Vector ForgettingAnalyzer::select_true_class(const Matrix& values, int tau) const {
  const Matrix& labels = seq_.task(tau).labels;
  Vector out(values.rows());
  for (int i = 0; i < values.rows(); ++i) out(i) = values(i, one_hot_index(labels, i));
  return out;
}

void ForgettingAnalyzer::check_pair(int tau_s, int tau_t) const {
  if (tau_s < 1 || tau_t > seq_.size()) throw std::out_of_range("task pair out of range");
  if (tau_t < tau_s) throw std::invalid_argument("target task precedes source task");
}

Vector ForgettingAnalyzer::drift(int tau_s, int tau_t) const {
  check_pair(tau_s, tau_t);
  const Matrix delta =
      map_(seq_.task(tau_s).features) * (traj_.optimum(tau_t) - traj_.optimum(tau_s));
  return select_true_class(delta, tau_s);
}

double ForgettingAnalyzer::cf(int tau_s, int tau_t) const {
  const double raw = drift(tau_s, tau_t).squaredNorm();
  return normalize_ ? raw / seq_.task(tau_s).samples() : raw;
}

Matrix ForgettingAnalyzer::summand_term(int tau_s, int k) const {
  const SvdFactors& src = svd_of(tau_s);
  const SvdFactors& tgt = svd_of(k);
  const ComplementProjector t = projector_before(k);
  const Matrix overlap = src.right.transpose() * t.apply_cols(tgt.right);
  return src.left * (src.singulars.asDiagonal() * (overlap * rotated_residual(k)));
}

double ForgettingAnalyzer::cf_closed_form(int tau_s, int tau_t,
                                          std::vector<double>* term_norms) const {
  check_pair(tau_s, tau_t);
  if (!has_theory())
    throw std::invalid_argument("no closed-form forgetting expression for a_gem");
  const int n_s = seq_.task(tau_s).samples();
  Matrix sum = Matrix::Zero(n_s, traj_.outputs);
  if (term_norms != nullptr) term_norms->clear();
  for (int k = tau_s + 1; k <= tau_t; ++k) {
    const Matrix term = summand_term(tau_s, k);
    sum += term;
    if (term_norms != nullptr) term_norms->push_back(select_true_class(term, tau_s).norm());
  }
  const double raw = select_true_class(sum, tau_s).squaredNorm();
  return normalize_ ? raw / n_s : raw;
}

Matrix ForgettingAnalyzer::overlap_matrix(int tau_s, int tau_t) const {
  check_pair(tau_s, tau_t);
  const SvdFactors& src = svd_of(tau_s);
  const SvdFactors& tgt = svd_of(tau_t);
  const ComplementProjector t = projector_before(tau_t);
  return src.right.transpose() * t.apply_cols(tgt.right);
}

Vector ForgettingAnalyzer::overlap_singular_values(int tau_s, int tau_t) const {
  Eigen::JacobiSVD<Matrix> svd(overlap_matrix(tau_s, tau_t));
  Vector s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) s(i) = std::min(1.0, std::max(0.0, s(i)));
  return s;
}

double ForgettingAnalyzer::cf_bound(int tau_s, int tau_t) const {
  check_pair(tau_s, tau_t);
  if (!has_theory()) throw std::invalid_argument("no forgetting bound for a_gem");
  const SvdFactors& src = svd_of(tau_s);
  if (src.rank() == 0) return 0.0;

  // PCA truncation: with the exact leading directions of the source task in
  // memory, only the spectrum below them can still drift.
  double prefactor = src.singulars(0);
  if (traj_.method == Method::pca_ogd) {
    const auto cov = traj_.pca_covered.find(tau_s);
    const auto exact = traj_.pca_exact.find(tau_s);
    if (cov != traj_.pca_covered.end() && exact != traj_.pca_exact.end() && exact->second)
      prefactor = cov->second >= src.rank() ? 0.0 : src.singulars(cov->second);
  }

  double total = 0.0;
  for (int k = tau_s + 1; k <= tau_t; ++k) {
    const ComplementProjector t = projector_before(k);
    double theta_src;
    double theta_tgt;
    if (t.empty()) {
      const Vector theta = overlap_singular_values(tau_s, k);
      theta_src = theta.size() > 0 ? theta(0) : 0.0;
      theta_tgt = 1.0;
    } else {
      theta_src = top_projected_cosine(src.right, t);
      theta_tgt = top_projected_cosine(svd_of(k).right, t);
    }
    total += prefactor * theta_src * theta_tgt * rotated_residual(k).norm();
  }
  const double raw = total * total;
  return normalize_ ? raw / seq_.task(tau_s).samples() : raw;
}

DriftRecord ForgettingAnalyzer::record(int tau_s, int tau_t) const {
  check_pair(tau_s, tau_t);
  DriftRecord rec;
  rec.source = tau_s;
  rec.target = tau_t;
  rec.drift = drift(tau_s, tau_t);
  rec.cf = cf(tau_s, tau_t);
  if (has_theory()) {
    rec.cf_closed_form = cf_closed_form(tau_s, tau_t, &rec.term_norms);
    rec.bound = cf_bound(tau_s, tau_t);
    for (int k = tau_s + 1; k <= tau_t; ++k)
      rec.overlap_singulars[k] = overlap_singular_values(tau_s, k);
  }
  if (rec.overlap_singulars.find(tau_t) == rec.overlap_singulars.end())
    rec.overlap_singulars[tau_t] = overlap_singular_values(tau_s, tau_t);
  return rec;
}

std::vector<SpectrumRow> spectrum_report(Method method, const FeatureMap& map,
                                         const TaskSequence& seq,
                                         const std::vector<int>& memory_sizes, double lambda,
                                         Hyper hyper, std::uint64_t seed) {
  if (seq.size() < 2) throw std::invalid_argument("spectrum_report needs at least two tasks");
  for (int m : memory_sizes)
    if (m < 0 || m > map.param_dim())
      throw std::invalid_argument("memory size must lie in [0, p]");

  TaskSequence head;
  head.generator = seq.generator;
  head.tasks = {seq.task(1), seq.task(2)};

  std::vector<SpectrumRow> rows;
  for (int m : memory_sizes) {
    Hyper h = hyper;
    h.mem_per_task = m;
    const TrainMode mode =
        method == Method::a_gem ? TrainMode::gradient_descent : TrainMode::closed_form;
    const Trajectory traj = train_sequence(method, map, head, lambda, h, seed, mode);
    const ForgettingAnalyzer analyzer(map, head, traj);
    const Vector s = analyzer.overlap_singular_values(1, 2);
    for (int i = 0; i < s.size(); ++i) rows.push_back({method, m, i, s(i)});
  }
  return rows;
}

}  // namespace linearcl
