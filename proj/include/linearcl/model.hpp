#pragma once

#include <cstdint>
#include <string>

#include "linearcl/spectral.hpp"

namespace linearcl {

enum class MapKind { identity, random_fourier, random_relu };

std::string to_string(MapKind kind);
MapKind parse_map_kind(const std::string& name);

// Constant feature map phi: all transform parameters are frozen at
// construction, so the induced kernel never changes during training.
class FeatureMap {
 public:
  static FeatureMap identity(int dim);
  // Paired cos/sin random Fourier features scaled by sqrt(2/p); rows have
  // unit norm when param_dim is even.
  static FeatureMap random_fourier(int input_dim, int param_dim, std::uint64_t map_seed);
  // sqrt(2/p) * max(0, W x) with frozen Gaussian W.
  static FeatureMap random_relu(int input_dim, int param_dim, std::uint64_t map_seed);

  static FeatureMap make(MapKind kind, int input_dim, int param_dim, std::uint64_t map_seed);

  MapKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int param_dim() const { return param_dim_; }
  std::uint64_t map_seed() const { return map_seed_; }

  // Row i of the result is phi(x_i).
  Matrix operator()(const Matrix& inputs) const;

 private:
  FeatureMap(MapKind kind, int input_dim, int param_dim, std::uint64_t seed)
      : kind_(kind), input_dim_(input_dim), param_dim_(param_dim), map_seed_(seed) {}

  MapKind kind_;
  int input_dim_;
  int param_dim_;
  std::uint64_t map_seed_;
  Matrix frequencies_;  // q x k frozen directions (fourier/relu)
};

inline Matrix apply_feature_map(const FeatureMap& map, const Matrix& inputs) {
  return map(inputs);
}

// One weight column per output; the origin omega_0 is pinned at zero so the
// initial function is identically zero.
struct Weights {
  Matrix values;  // p x c
  Matrix origin;  // p x c, zeros

  static Weights zeros(int param_dim, int outputs) {
    Weights w;
    w.values = Matrix::Zero(param_dim, outputs);
    w.origin = Matrix::Zero(param_dim, outputs);
    return w;
  }
  int param_dim() const { return static_cast<int>(values.rows()); }
  int outputs() const { return static_cast<int>(values.cols()); }
};

// phi(X) (values - origin), n x c.
Matrix predict(const FeatureMap& map, const Weights& w, const Matrix& inputs);

// kappa = (phi(Xa) T)(phi(Xb) T)^T; pass projector = nullptr for the plain
// kernel.
Matrix kernel(const FeatureMap& map, const Matrix& xa, const Matrix& xb,
              const ComplementProjector* projector = nullptr);

}  // namespace linearcl
