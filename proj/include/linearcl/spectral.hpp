#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace linearcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thin SVD A = U diag(s) V^T with rank truncation and a deterministic sign
// convention: in every right singular vector the entry of largest magnitude
// is positive (first such entry on ties).
struct SvdFactors {
  Matrix left;      // U, n x r, orthonormal columns
  Vector singulars; // descending, all >= 0
  Matrix right;     // V, p x r, orthonormal columns
  double rank_tol = 0.0;

  int rank() const { return static_cast<int>(singulars.size()); }
  Matrix reconstruct() const { return left * singulars.asDiagonal() * right.transpose(); }
};

// rank_tol is relative to the largest singular value; must lie in (0, 1e-3].
SvdFactors thin_svd(const Matrix& a, double rank_tol = 1e-12);

struct BasisLabel {
  int task_id = 0;
  int index = 0;
};

// Orthonormal column set in parameter space with per-column provenance.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  explicit OrthonormalBasis(int dim) : vectors_(dim, 0) {}
  OrthonormalBasis(Matrix vectors, std::vector<BasisLabel> labels);

  int dim() const { return static_cast<int>(vectors_.rows()); }
  int size() const { return static_cast<int>(vectors_.cols()); }
  bool empty() const { return size() == 0; }
  const Matrix& vectors() const { return vectors_; }
  const std::vector<BasisLabel>& labels() const { return labels_; }

  // In-place append used by the learners; returns false when v is dependent
  // (residual norm <= dep_tol * ||v||).
  bool try_append(const Vector& v, double dep_tol, BasisLabel label);

 private:
  Matrix vectors_;
  std::vector<BasisLabel> labels_;
};

// Value-semantics append: the input basis is left untouched; nullopt when
// the vector is rejected as dependent.
std::optional<OrthonormalBasis> gram_schmidt_append(const OrthonormalBasis& basis,
                                                    const Vector& v, double dep_tol,
                                                    BasisLabel label = {});

// Cosines of the principal angles between span(a) and span(b): the singular
// values of a^T b, descending, clamped to [0, 1].
Vector principal_angle_cosines(const OrthonormalBasis& a, const OrthonormalBasis& b);

// T = I - P P^T for an orthonormal P. The complement basis R with T = R R^T
// is never formed; everything goes through subtract-the-projections.
class ComplementProjector {
 public:
  ComplementProjector() = default;
  explicit ComplementProjector(OrthonormalBasis basis) : basis_(std::move(basis)) {}

  bool empty() const { return basis_.empty(); }
  const OrthonormalBasis& basis() const { return basis_; }

  Vector apply(const Vector& v) const;
  // Applies T to every column (T * m) or every row (m * T).
  Matrix apply_cols(const Matrix& m) const;
  Matrix apply_rows(const Matrix& m) const;

 private:
  OrthonormalBasis basis_;
};

inline Vector project_complement(const ComplementProjector& t, const Vector& v) {
  return t.apply(v);
}

// sum_{i<d} s_i^2 / sum_i s_i^2 for a descending non-negative spectrum.
double explained_variance_ratio(const Vector& singulars, int d);

}  // namespace linearcl
