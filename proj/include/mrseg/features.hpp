#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mrseg/cloud.hpp"

namespace mrseg {

/// Row-major per-point feature vectors.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t rows = 0;
  std::vector<double> values;  // rows * names.size()

  std::size_t cols() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * names.size() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * names.size(), names.size()};
  }
  bool operator==(const FeatureMatrix&) const = default;
};

/// Eigen-decomposition of a symmetric 3x3 matrix. Eigenvalues descend and are
/// clamped to >= 0; eigenvectors are unit length with a deterministic sign
/// (z component >= 0, then x, then y).
struct SymEigen3 {
  std::array<double, 3> values;
  std::array<Vec3, 3> vectors;
};

/// upper = (xx, xy, xz, yy, yz, zz)
SymEigen3 sym_eigen3(const std::array<double, 6>& upper);

/// Per-point descriptors from the covariance eigenvalues of each point's k
/// nearest neighbors (the point included): linearity, planarity, scattering,
/// verticality, plus elevation above the cloud's min z, plus r,g,b in [0,1]
/// when the cloud has colors. Degenerate neighborhoods (largest eigenvalue
/// below 1e-12) yield all-zero shape features.
FeatureMatrix eigen_features(const PointCloud& cloud, std::size_t k);

}  // namespace mrseg
