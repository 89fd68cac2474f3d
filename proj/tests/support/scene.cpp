#include "support/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mrseg::test {

namespace {

constexpr double kWallY = 7.6;    // facade plane
constexpr double kMountY = 7.545; // extinguisher centers, just off the facade

struct Builder {
  PointCloud cloud;
  std::mt19937_64 rng;
  double density = 0.0;

  explicit Builder(std::uint64_t seed, double density) : rng(seed), density(density) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  double gauss(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng); }

  std::size_t count_for_area(double area) {
    return static_cast<std::size_t>(std::llround(area * density));
  }

  void add(const Vec3& p, ClassId label, std::uint8_t r, std::uint8_t g, std::uint8_t b,
           double color_noise = 4.0) {
    auto channel = [&](std::uint8_t base) {
      const double v = base + gauss(color_noise);
      return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    };
    cloud.positions.push_back(p);
    cloud.colors.push_back({channel(r), channel(g), channel(b)});
    cloud.labels.push_back(label);
  }

  // horizontal rectangle [x0,x1] x [y0,y1] at height z
  void ground(double x0, double x1, double y0, double y1, double z) {
    const std::size_t n = count_for_area((x1 - x0) * (y1 - y0));
    for (std::size_t i = 0; i < n; ++i)
      add({uniform(x0, x1), uniform(y0, y1), z + gauss(0.004)}, kGround, 120, 110, 100);
  }

  // vertical plane at y = kWallY, [x0,x1] x [z0,z1], minus mounted fixtures
  void wall(double x0, double x1, double z0, double z1,
            const std::vector<std::array<double, 4>>& cutouts) {
    const std::size_t n = count_for_area((x1 - x0) * (z1 - z0));
    for (std::size_t i = 0; i < n; ++i) {
      const double x = uniform(x0, x1);
      const double z = uniform(z0, z1);
      bool inside_cutout = false;
      for (const auto& c : cutouts)
        inside_cutout |= (x >= c[0] && x <= c[1] && z >= c[2] && z <= c[3]);
      if (inside_cutout) continue;  // the door fills it
      add({x, kWallY + gauss(0.002), z}, kWall, 128, 128, 128);
    }
  }

  // corrugated sheet in a wall cutout: horizontal ridges (phase along z).
  // The 0.24 m wavelength dwarfs a full-resolution neighborhood, so locally
  // the surface is a coherently tilted plane; the 0.032 m peak stays inside
  // one 0.05 m voxel, so the subsampled sheet flattens back into the facade.
  void door(double x0, double x1, double z0, double z1) {
    const std::size_t n = count_for_area((x1 - x0) * (z1 - z0));
    constexpr double amplitude = 0.016;
    constexpr double wavelength = 0.24;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = uniform(x0, x1);
      const double z = uniform(z0, z1);
      const double bump = amplitude * (1.0 + std::cos(2.0 * std::numbers::pi * z / wavelength));
      add({x, kWallY - bump + gauss(0.002), z}, kDoor, 128, 128, 128);
    }
  }

  // rough panel mounted flush in a wall cutout: same plane as the facade but
  // with four times its surface noise — pure texture, no silhouette
  void board(double x0, double x1, double z0, double z1) {
    const std::size_t n = count_for_area((x1 - x0) * (z1 - z0));
    for (std::size_t i = 0; i < n; ++i)
      add({uniform(x0, x1), kWallY + gauss(0.008), uniform(z0, z1)}, kBoard, 128, 128, 128);
  }

  // small volumetric blob mounted low on the facade
  void extinguisher(double cx, double cz, std::size_t n) {
    constexpr double radius = 0.045;
    for (std::size_t i = 0; i < n;) {
      const double dx = uniform(-radius, radius);
      const double dy = uniform(-radius, radius);
      const double dz = uniform(-radius, radius);
      if (dx * dx + dy * dy + dz * dz > radius * radius) continue;
      add({cx + dx, kMountY + dy, cz + dz}, kExtinguisher, 128, 128, 128);
      ++i;
    }
  }

  // thin vertical cylinder surface
  void pole(double cx, double cy, double z0, double z1, std::size_t n) {
    constexpr double radius = 0.035;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = uniform(0.0, 2.0 * std::numbers::pi);
      add({cx + radius * std::cos(a), cy + radius * std::sin(a), uniform(z0, z1)}, kPole, 60,
          60, 70);
    }
  }

  // small vivid panel above a pole, facing the y axis
  void sign(double cx, double cy, double z0, double z1, double width) {
    const std::size_t n = count_for_area(width * (z1 - z0));
    for (std::size_t i = 0; i < n; ++i)
      add({cx + uniform(-width / 2, width / 2), cy + gauss(0.002), uniform(z0, z1)}, kSign,
          200, 40, 40);
  }
};

}  // namespace

PointCloud make_scene(std::uint64_t seed, double density) {
  Builder b(seed, density);

  b.ground(0.0, 8.0, 0.0, 7.0, 0.0);

  const std::vector<std::array<double, 4>> doors = {{1.2, 2.1, 0.25, 2.25},
                                                    {5.6, 6.5, 0.25, 2.25}};
  const std::vector<std::array<double, 4>> boards = {{3.0, 4.2, 1.35, 2.25},
                                                     {6.7, 7.5, 1.45, 2.25}};
  std::vector<std::array<double, 4>> cutouts = doors;
  cutouts.insert(cutouts.end(), boards.begin(), boards.end());
  b.wall(0.3, 7.7, 0.2, 2.7, cutouts);
  for (const auto& d : doors) b.door(d[0], d[1], d[2], d[3]);
  for (const auto& p : boards) b.board(p[0], p[1], p[2], p[3]);

  const std::size_t blob_points = b.count_for_area(0.85);
  b.extinguisher(0.7, 0.45, blob_points);
  b.extinguisher(2.6, 0.45, blob_points);
  b.extinguisher(4.6, 0.45, blob_points);

  const std::size_t pole_points = b.count_for_area(1.5);
  const std::array<std::array<double, 2>, 3> pole_xy = {{{1.5, 2.0}, {4.0, 4.5}, {6.5, 1.5}}};
  for (const auto& [px, py] : pole_xy) {
    b.pole(px, py, 0.2, 2.2, pole_points);
    b.sign(px, py, 2.35, 2.8, 0.6);
  }

  return std::move(b.cloud);
}

PipelineConfig scene_config() { return parse_config(scene_config_json()); }

std::string scene_config_json() {
  return R"({
  "classes": [
    {"name": "ground"},
    {"name": "wall"},
    {"name": "pole"},
    {"name": "sign"},
    {"name": "door", "resolution": "high"},
    {"name": "board", "resolution": "high"},
    {"name": "extinguisher", "resolution": "high"}
  ],
  "merge": {"door": "wall", "board": "wall", "extinguisher": "wall"},
  "voxel_size": 0.05,
  "k_neighbors": 14,
  "training": {"learning_rate": 0.2, "epochs": 120, "seed": 42}
})";
}

}  // namespace mrseg::test
