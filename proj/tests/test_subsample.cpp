#include <doctest.h>

#include <random>
#include <set>

#include "mrseg/error.hpp"
#include "mrseg/subsample.hpp"
#include "support/oracles.hpp"

using namespace mrseg;

TEST_CASE("voxel subsampling matches the per-bucket brute-force oracle") {
  std::mt19937_64 meta(4711);
  for (int instance = 0; instance < 25; ++instance) {
    const PointCloud cloud = test::random_cloud(meta(), 1 + meta() % 1800);
    const double voxel = 0.05 + 0.1 * (instance % 5);
    CAPTURE(instance);

    const SubsampleResult got = voxel_subsample(cloud, voxel);
    const SubsampleResult want = test::subsample_brute(cloud, voxel);

    REQUIRE(got.low_cloud.size() == want.low_cloud.size());
    CHECK(got.grid_params == want.grid_params);
    CHECK(got.rep_index == want.rep_index);
    CHECK(got.voxel_of == want.voxel_of);
    CHECK(got.low_cloud == want.low_cloud);
  }
}

TEST_CASE("subsampled points are original points in ascending voxel key order") {
  const PointCloud cloud = test::random_cloud(11, 1000);
  const SubsampleResult sub = voxel_subsample(cloud, 0.12);

  REQUIRE(sub.rep_index.size() == sub.low_cloud.size());
  REQUIRE(sub.voxel_of.size() == sub.low_cloud.size());
  for (std::size_t i = 0; i < sub.low_cloud.size(); ++i) {
    CHECK(sub.low_cloud.positions[i] == cloud.positions[sub.rep_index[i]]);
    CHECK(voxel_key(sub.low_cloud.positions[i], sub.grid_params) == sub.voxel_of[i]);
    if (i > 0) CHECK(sub.voxel_of[i - 1] < sub.voxel_of[i]);
  }

  // one representative per occupied voxel, each from its own voxel
  std::set<VoxelKey> keys(sub.voxel_of.begin(), sub.voxel_of.end());
  CHECK(keys.size() == sub.low_cloud.size());
}

TEST_CASE("coarser voxels never produce more points") {
  const PointCloud cloud = test::random_cloud(13, 3000);
  std::size_t last = cloud.size() + 1;
  for (double voxel : {0.02, 0.05, 0.1, 0.3, 1.0}) {
    const std::size_t n = voxel_subsample(cloud, voxel).low_cloud.size();
    CHECK(n <= last);
    last = n;
  }
  // voxels wider than the cloud collapse it to a single representative
  CHECK(voxel_subsample(cloud, 10.0).low_cloud.size() == 1);
}

TEST_CASE("majority labels ignore unlabeled points and tie toward the lower id") {
  PointCloud cloud;
  // one voxel: labels {2, 2, 5, unlabeled}; majority 2
  cloud.positions = {{0.01, 0, 0}, {0.02, 0, 0}, {0.03, 0, 0}, {0.04, 0, 0}};
  cloud.labels = {2, 2, 5, kUnlabeled};
  CHECK(voxel_subsample(cloud, 1.0).low_cloud.labels == std::vector<ClassId>{2});

  // tie between 1 and 3 -> 1
  cloud.labels = {3, 1, 3, 1};
  CHECK(voxel_subsample(cloud, 1.0).low_cloud.labels == std::vector<ClassId>{1});

  // all unlabeled -> unlabeled
  cloud.labels = {kUnlabeled, kUnlabeled, kUnlabeled, kUnlabeled};
  CHECK(voxel_subsample(cloud, 1.0).low_cloud.labels == std::vector<ClassId>{kUnlabeled});
}

TEST_CASE("shared grid parameters align voxels across clouds") {
  const PointCloud full = test::random_cloud(17, 2000);
  const SubsampleResult sub = voxel_subsample(full, 0.2);

  // re-subsampling a subset on the same grid lands in a subset of the voxels
  PointCloud half;
  for (std::size_t i = 0; i < full.size(); i += 2) half.positions.push_back(full.positions[i]);
  const SubsampleResult again = voxel_subsample(half, sub.grid_params);
  const std::set<VoxelKey> keys(sub.voxel_of.begin(), sub.voxel_of.end());
  for (const VoxelKey& k : again.voxel_of) CHECK(keys.count(k) == 1);
}

TEST_CASE("subsample argument validation") {
  CHECK_THROWS_AS(voxel_subsample(PointCloud{}, 0.1), ValidationError);
  const PointCloud cloud = test::random_cloud(1, 10);
  CHECK_THROWS_AS(voxel_subsample(cloud, 0.0), ValidationError);
}
