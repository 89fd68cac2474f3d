#include "mrseg/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "mrseg/error.hpp"
#include "mrseg/kdtree.hpp"
#include "mrseg/parallel.hpp"

namespace mrseg {

namespace {

constexpr double kLambdaFloor = 1e-12;  // m^2; below this the neighborhood is a point

void fix_sign(Vec3& v) {
  double s = v[2];
  if (s == 0.0) s = v[0];
  if (s == 0.0) s = v[1];
  if (s < 0.0) {
    v[0] = -v[0];
    v[1] = -v[1];
    v[2] = -v[2];
  }
}

}  // namespace

SymEigen3 sym_eigen3(const std::array<double, 6>& upper) {
  Eigen::Matrix3d m;
  m << upper[0], upper[1], upper[2],
       upper[1], upper[3], upper[4],
       upper[2], upper[4], upper[5];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);

  SymEigen3 out;
  // Eigen returns eigenvalues ascending
  for (int i = 0; i < 3; ++i) {
    const int src = 2 - i;
    out.values[i] = std::max(solver.eigenvalues()[src], 0.0);
    out.vectors[i] = {solver.eigenvectors()(0, src), solver.eigenvectors()(1, src),
                      solver.eigenvectors()(2, src)};
    fix_sign(out.vectors[i]);
  }
  return out;
}

FeatureMatrix eigen_features(const PointCloud& cloud, std::size_t k) {
  validate(cloud);
  const std::size_t n = cloud.size();
  if (k < 3) throw ValidationError("neighborhood size k must be at least 3");
  if (k > n)
    throw ValidationError("neighborhood size k=" + std::to_string(k) +
                          " exceeds the cloud size of " + std::to_string(n));

  FeatureMatrix out;
  out.names = {"linearity", "planarity", "scattering", "verticality", "elevation"};
  if (cloud.has_colors()) {
    out.names.insert(out.names.end(), {"r", "g", "b"});
  }
  const std::size_t cols = out.names.size();
  out.rows = n;
  out.values.assign(n * cols, 0.0);

  double min_z = cloud.positions[0][2];
  for (const Vec3& p : cloud.positions) min_z = std::min(min_z, p[2]);

  const NeighborIndex index(cloud.positions);

  par::parallel_chunks(n, 1024, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> nb;
    for (std::size_t i = begin; i < end; ++i) {
      nb = index.knn(cloud.positions[i], k);

      Vec3 mean{0.0, 0.0, 0.0};
      for (std::uint32_t j : nb)
        for (int a = 0; a < 3; ++a) mean[a] += cloud.positions[j][a];
      for (int a = 0; a < 3; ++a) mean[a] /= static_cast<double>(k);

      std::array<double, 6> cov{};  // xx, xy, xz, yy, yz, zz
      for (std::uint32_t j : nb) {
        const double dx = cloud.positions[j][0] - mean[0];
        const double dy = cloud.positions[j][1] - mean[1];
        const double dz = cloud.positions[j][2] - mean[2];
        cov[0] += dx * dx;
        cov[1] += dx * dy;
        cov[2] += dx * dz;
        cov[3] += dy * dy;
        cov[4] += dy * dz;
        cov[5] += dz * dz;
      }
      for (double& c : cov) c /= static_cast<double>(k);

      const SymEigen3 eig = sym_eigen3(cov);
      const double l1 = eig.values[0];
      double* row = out.values.data() + i * cols;
      if (l1 >= kLambdaFloor) {
        row[0] = (eig.values[0] - eig.values[1]) / l1;
        row[1] = (eig.values[1] - eig.values[2]) / l1;
        row[2] = eig.values[2] / l1;
        row[3] = std::clamp(1.0 - std::abs(eig.vectors[2][2]), 0.0, 1.0);
      }
      row[4] = cloud.positions[i][2] - min_z;
      if (cols > 5) {
        row[5] = cloud.colors[i][0] / 255.0;
        row[6] = cloud.colors[i][1] / 255.0;
        row[7] = cloud.colors[i][2] / 255.0;
      }
    }
  });

  return out;
}

}  // namespace mrseg
