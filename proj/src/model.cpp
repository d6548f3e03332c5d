#include "linearcl/model.hpp"

#include <cmath>
#include <stdexcept>

#include "linearcl/rng.hpp"

namespace linearcl {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::identity: return "identity";
    case MapKind::random_fourier: return "random_fourier";
    case MapKind::random_relu: return "random_relu";
  }
  return "identity";
}

MapKind parse_map_kind(const std::string& name) {
  if (name == "identity") return MapKind::identity;
  if (name == "random_fourier") return MapKind::random_fourier;
  if (name == "random_relu") return MapKind::random_relu;
  throw std::invalid_argument("unknown feature map: " + name);
}

FeatureMap FeatureMap::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("feature map dimension must be >= 1");
  return FeatureMap(MapKind::identity, dim, dim, 0);
}

FeatureMap FeatureMap::random_fourier(int input_dim, int param_dim, std::uint64_t map_seed) {
  if (input_dim < 1 || param_dim < 1)
    throw std::invalid_argument("feature map dimensions must be >= 1");
  FeatureMap m(MapKind::random_fourier, input_dim, param_dim, map_seed);
  SplitRng rng = SplitRng(map_seed).derive("fourier");
  const int pairs = (param_dim + 1) / 2;
  m.frequencies_.resize(input_dim, pairs);
  for (int j = 0; j < pairs; ++j)
    for (int i = 0; i < input_dim; ++i) m.frequencies_(i, j) = rng.next_gaussian();
  return m;
}

FeatureMap FeatureMap::random_relu(int input_dim, int param_dim, std::uint64_t map_seed) {
  if (input_dim < 1 || param_dim < 1)
    throw std::invalid_argument("feature map dimensions must be >= 1");
  FeatureMap m(MapKind::random_relu, input_dim, param_dim, map_seed);
  SplitRng rng = SplitRng(map_seed).derive("relu");
  m.frequencies_.resize(input_dim, param_dim);
  for (int j = 0; j < param_dim; ++j)
    for (int i = 0; i < input_dim; ++i) m.frequencies_(i, j) = rng.next_gaussian();
  return m;
}

FeatureMap FeatureMap::make(MapKind kind, int input_dim, int param_dim, std::uint64_t map_seed) {
  switch (kind) {
    case MapKind::identity:
      if (param_dim != input_dim)
        throw std::invalid_argument("identity map requires param_dim == input_dim");
      return identity(input_dim);
    case MapKind::random_fourier: return random_fourier(input_dim, param_dim, map_seed);
    case MapKind::random_relu: return random_relu(input_dim, param_dim, map_seed);
  }
  throw std::invalid_argument("unknown feature map kind");
}

Matrix FeatureMap::operator()(const Matrix& inputs) const {
  if (inputs.cols() != input_dim_)
    throw std::invalid_argument("feature map: input dimension mismatch");
  switch (kind_) {
    case MapKind::identity: return inputs;
    case MapKind::random_fourier: {
      const Matrix proj = inputs * frequencies_;  // n x pairs
      Matrix out(inputs.rows(), param_dim_);
      const double scale = std::sqrt(2.0 / param_dim_);
      for (int j = 0; j < param_dim_; ++j) {
        const int pair = j / 2;
        if (j % 2 == 0)
          out.col(j) = scale * proj.col(pair).array().cos();
        else
          out.col(j) = scale * proj.col(pair).array().sin();
      }
      return out;
    }
    case MapKind::random_relu: {
      const double scale = std::sqrt(2.0 / param_dim_);
      return scale * (inputs * frequencies_).cwiseMax(0.0);
    }
  }
  throw std::logic_error("unreachable");
}

Matrix predict(const FeatureMap& map, const Weights& w, const Matrix& inputs) {
  if (w.param_dim() != map.param_dim())
    throw std::invalid_argument("predict: weights do not match the feature map");
  return map(inputs) * (w.values - w.origin);
}

Matrix kernel(const FeatureMap& map, const Matrix& xa, const Matrix& xb,
              const ComplementProjector* projector) {
  Matrix fa = map(xa);
  Matrix fb = map(xb);
  if (projector != nullptr && !projector->empty()) {
    fa = projector->apply_rows(fa);
    fb = projector->apply_rows(fb);
  }
  return fa * fb.transpose();
}

}  // namespace linearcl
