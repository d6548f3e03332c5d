#include "linearcl/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace linearcl {

SvdFactors thin_svd(const Matrix& a, double rank_tol) {
  if (!a.allFinite()) throw std::invalid_argument("thin_svd: matrix has non-finite entries");
  if (!(rank_tol > 0.0) || rank_tol > 1e-3)
    throw std::invalid_argument("thin_svd: rank_tol must lie in (0, 1e-3]");

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;

  int r = 0;
  while (r < sv.size() && sv(r) > rank_tol * sigma_max) ++r;
  if (sigma_max == 0.0) r = 0;

  SvdFactors f;
  f.rank_tol = rank_tol;
  f.left = svd.matrixU().leftCols(r);
  f.right = svd.matrixV().leftCols(r);
  f.singulars = sv.head(r);

  // Sign convention: largest-magnitude entry of each right vector positive.
  for (int j = 0; j < r; ++j) {
    int arg = 0;
    double best = std::abs(f.right(0, j));
    for (int i = 1; i < f.right.rows(); ++i) {
      const double m = std::abs(f.right(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (f.right(arg, j) < 0.0) {
      f.right.col(j) = -f.right.col(j);
      f.left.col(j) = -f.left.col(j);
    }
  }
  return f;
}

OrthonormalBasis::OrthonormalBasis(Matrix vectors, std::vector<BasisLabel> labels)
    : vectors_(std::move(vectors)), labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) != vectors_.cols())
    throw std::invalid_argument("OrthonormalBasis: one label per column required");
}

bool OrthonormalBasis::try_append(const Vector& v, double dep_tol, BasisLabel label) {
  if (!(dep_tol > 0.0)) throw std::invalid_argument("gram_schmidt_append: dep_tol must be positive");
  if (vectors_.rows() > 0 && v.size() != vectors_.rows())
    throw std::invalid_argument("gram_schmidt_append: dimension mismatch");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return false;

  Vector r = v;
  // Two MGS passes keep the basis orthonormal well below the 1e-10 contract.
  for (int pass = 0; pass < 2; ++pass) {
    if (size() > 0) r -= vectors_ * (vectors_.transpose() * r);
  }
  const double rnorm = r.norm();
  if (rnorm <= dep_tol * vnorm) return false;

  if (vectors_.rows() == 0) vectors_.resize(v.size(), 0);
  vectors_.conservativeResize(Eigen::NoChange, vectors_.cols() + 1);
  vectors_.col(vectors_.cols() - 1) = r / rnorm;
  labels_.push_back(label);
  return true;
}

std::optional<OrthonormalBasis> gram_schmidt_append(const OrthonormalBasis& basis, const Vector& v,
                                                    double dep_tol, BasisLabel label) {
  OrthonormalBasis out = basis;
  if (!out.try_append(v, dep_tol, label)) return std::nullopt;
  return out;
}

Vector principal_angle_cosines(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  if (a.dim() != b.dim() && !a.empty() && !b.empty())
    throw std::invalid_argument("principal_angle_cosines: ambient dimensions differ");
  if (a.empty() || b.empty()) return Vector(0);
  Matrix cross = a.vectors().transpose() * b.vectors();
  Eigen::JacobiSVD<Matrix> svd(cross);
  Vector cos = svd.singularValues();
  for (int i = 0; i < cos.size(); ++i) cos(i) = std::min(1.0, std::max(0.0, cos(i)));
  return cos;
}

Vector ComplementProjector::apply(const Vector& v) const {
  if (basis_.empty()) return v;
  if (v.size() != basis_.dim())
    throw std::invalid_argument("project_complement: dimension mismatch");
  const Matrix& p = basis_.vectors();
  Vector r = v - p * (p.transpose() * v);
  r -= p * (p.transpose() * r);
  return r;
}

Matrix ComplementProjector::apply_cols(const Matrix& m) const {
  if (basis_.empty()) return m;
  if (m.rows() != basis_.dim())
    throw std::invalid_argument("project_complement: dimension mismatch");
  const Matrix& p = basis_.vectors();
  Matrix r = m - p * (p.transpose() * m);
  r -= p * (p.transpose() * r);
  return r;
}

Matrix ComplementProjector::apply_rows(const Matrix& m) const {
  if (basis_.empty()) return m;
  if (m.cols() != basis_.dim())
    throw std::invalid_argument("project_complement: dimension mismatch");
  const Matrix& p = basis_.vectors();
  Matrix r = m - (m * p) * p.transpose();
  r -= (r * p) * p.transpose();
  return r;
}

double explained_variance_ratio(const Vector& singulars, int d) {
  const int n = static_cast<int>(singulars.size());
  if (d < 0 || d > n) throw std::invalid_argument("explained_variance_ratio: d out of range");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (singulars(i) < 0.0)
      throw std::invalid_argument("explained_variance_ratio: negative singular value");
    if (i > 0 && singulars(i) > singulars(i - 1))
      throw std::invalid_argument("explained_variance_ratio: spectrum not descending");
    total += singulars(i) * singulars(i);
  }
  if (total == 0.0) throw std::invalid_argument("explained_variance_ratio: all-zero spectrum");
  double head = 0.0;
  for (int i = 0; i < d; ++i) head += singulars(i) * singulars(i);
  return head / total;
}

}  // namespace linearcl
