#include <doctest.h>

#include <limits>

#include "mrseg/cloud.hpp"
#include "mrseg/error.hpp"
#include "support/scene.hpp"

using namespace mrseg;

namespace {

ClassSchema seven_class_schema() { return test::scene_config().schema; }

}  // namespace

TEST_CASE("schema lookups") {
  const ClassSchema schema = seven_class_schema();
  CHECK(schema.size() == 7);
  CHECK(schema.at(test::kWall).name == "wall");
  CHECK(schema.find("door") == ClassId{test::kDoor});
  CHECK(!schema.find("window").has_value());
  CHECK(schema.is_high(test::kDoor));
  CHECK(!schema.is_high(test::kGround));
  CHECK(schema.high_classes() ==
        std::vector<ClassId>{test::kDoor, test::kBoard, test::kExtinguisher});
  CHECK(schema.low_classes() ==
        std::vector<ClassId>{test::kGround, test::kWall, test::kPole, test::kSign});
  CHECK(schema.names().front() == "ground");
  CHECK_THROWS_AS((void)schema.at(7), ValidationError);
}

TEST_CASE("schema rejects duplicates and all-high universes") {
  CHECK_THROWS_AS(ClassSchema({{"a", Resolution::Low}, {"a", Resolution::Low}}),
                  ValidationError);
  CHECK_THROWS_AS(ClassSchema({{"a", Resolution::High}}), ValidationError);
}

TEST_CASE("merged schema concatenates high classes into their targets") {
  const PipelineConfig config = test::scene_config();
  const MergedSchema& merged = config.merged;

  CHECK(merged.size() == 4);
  CHECK(merged.names == std::vector<std::string>{"ground", "wall'", "pole", "sign"});
  CHECK(merged.forward == std::vector<ClassId>{0, 1, 2, 3, 1, 1, 1});
  CHECK(merged.to_original == std::vector<ClassId>{0, 1, 2, 3});
  CHECK(merged.members[1] ==
        std::vector<ClassId>{test::kWall, test::kDoor, test::kBoard, test::kExtinguisher});
  CHECK(merged.concatenated == std::vector<bool>{false, true, false, false});
  CHECK(!merged.identity());
}

TEST_CASE("merged schema without merges is the identity") {
  const ClassSchema schema({{"a", Resolution::Low}, {"b", Resolution::Low}});
  const MergedSchema merged = build_merged_schema(schema, {});
  CHECK(merged.identity());
  CHECK(merged.names == std::vector<std::string>{"a", "b"});
  CHECK(merged.forward == std::vector<ClassId>{0, 1});
}

TEST_CASE("merged schema validation") {
  const ClassSchema schema = seven_class_schema();

  SUBCASE("high class missing from the merge map") {
    MergeMap merge{{test::kDoor, test::kWall}, {test::kBoard, test::kWall}};
    CHECK_THROWS_WITH_AS(build_merged_schema(schema, merge),
                         "high resolution class \"extinguisher\" is missing from the merge map",
                         ValidationError);
  }
  SUBCASE("merge keyed on a low class") {
    MergeMap merge{{test::kGround, test::kWall},
                   {test::kDoor, test::kWall},
                   {test::kBoard, test::kWall},
                   {test::kExtinguisher, test::kWall}};
    CHECK_THROWS_AS(build_merged_schema(schema, merge), ValidationError);
  }
  SUBCASE("merge target is high") {
    MergeMap merge{{test::kDoor, test::kBoard},
                   {test::kBoard, test::kWall},
                   {test::kExtinguisher, test::kWall}};
    CHECK_THROWS_AS(build_merged_schema(schema, merge), ValidationError);
  }
  SUBCASE("unknown ids") {
    CHECK_THROWS_AS(build_merged_schema(schema, MergeMap{{99, test::kWall}}), ValidationError);
  }
}

TEST_CASE("relabel maps labels and passes the sentinel through") {
  const std::vector<ClassId> forward{0, 1, 2, 3, 1, 1, 1};
  CHECK(relabel(std::vector<ClassId>{6, kUnlabeled, 0}, forward) ==
        std::vector<ClassId>{1, kUnlabeled, 0});
  CHECK_THROWS_AS(relabel(std::vector<ClassId>{7}, forward), ValidationError);
}

TEST_CASE("select_points keeps attributes aligned") {
  PointCloud cloud;
  cloud.positions = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  cloud.colors = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  cloud.labels = {10, 11, 12};
  cloud.intensity = {0.5f, 0.6f, 0.7f};

  const PointCloud subset = select_points(cloud, {2, 0});
  CHECK(subset.positions == std::vector<Vec3>{{2, 0, 0}, {0, 0, 0}});
  CHECK(subset.colors == std::vector<Color>{{7, 8, 9}, {1, 2, 3}});
  CHECK(subset.labels == std::vector<ClassId>{12, 10});
  CHECK(subset.intensity == std::vector<float>{0.7f, 0.5f});

  CHECK_THROWS_AS(select_points(cloud, {3}), ValidationError);
}

TEST_CASE("cloud validation catches mismatches and bad coordinates") {
  PointCloud cloud;
  cloud.positions = {{0, 0, 0}, {1, 1, 1}};
  CHECK_NOTHROW(validate(cloud));

  SUBCASE("short attribute") {
    cloud.labels = {1};
    CHECK_THROWS_AS(validate(cloud), ValidationError);
  }
  SUBCASE("non-finite coordinate") {
    cloud.positions[1][2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(cloud), ValidationError);
  }
}

TEST_CASE("scene generator keeps merged families apart and fractions in range") {
  const PointCloud scene = test::make_scene(3, 400.0);
  const PipelineConfig config = test::scene_config();
  REQUIRE(scene.size() > 10000);

  std::vector<std::size_t> per_class(config.schema.size(), 0);
  std::size_t wall_family = 0;
  for (ClassId l : scene.labels) {
    ++per_class.at(l);
    if (config.merged.forward[l] == config.merged.forward[test::kWall]) ++wall_family;
  }
  for (std::size_t n : per_class) CHECK(n > 100);  // every class is represented
  CHECK(static_cast<double>(wall_family) / scene.size() < 0.30);
}
