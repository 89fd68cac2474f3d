// Python surface for the segmentation core: clouds, PLY I/O, subsampling,
// neighborhoods, eigen-features, the linear classifier, label projection,
// evaluation, and the two-stage pipeline.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrseg/classifier.hpp"
#include "mrseg/cloud.hpp"
#include "mrseg/config.hpp"
#include "mrseg/error.hpp"
#include "mrseg/features.hpp"
#include "mrseg/kdtree.hpp"
#include "mrseg/metrics.hpp"
#include "mrseg/parallel.hpp"
#include "mrseg/pipeline.hpp"
#include "mrseg/ply_io.hpp"
#include "mrseg/projection.hpp"
#include "mrseg/subsample.hpp"

namespace py = pybind11;
using namespace mrseg;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U32Array = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(const std::vector<Vec3>& rows) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    for (py::ssize_t j = 0; j < 3; ++j) view(i, j) = rows[i][j];
  return out;
}

py::array_t<std::uint8_t> to_array(const std::vector<Color>& rows) {
  py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    for (py::ssize_t j = 0; j < 3; ++j) view(i, j) = rows[i][j];
  return out;
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& values) {
  // the (count, pointer) constructor copies the buffer
  return py::array_t<T>(static_cast<py::ssize_t>(values.size()), values.data());
}

std::vector<Vec3> vec3_rows(const DoubleArray& array, const char* what) {
  if (array.ndim() != 2 || array.shape(1) != 3)
    throw ValidationError(std::string(what) + " must be an (n, 3) array");
  auto view = array.unchecked<2>();
  std::vector<Vec3> rows(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    rows[i] = {view(i, 0), view(i, 1), view(i, 2)};
  return rows;
}

std::vector<Color> color_rows(const U8Array& array) {
  if (array.ndim() != 2 || array.shape(1) != 3)
    throw ValidationError("colors must be an (n, 3) array");
  auto view = array.unchecked<2>();
  std::vector<Color> rows(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t i = 0; i < view.shape(0); ++i)
    rows[i] = {view(i, 0), view(i, 1), view(i, 2)};
  return rows;
}

template <typename T, typename Array>
std::vector<T> column(const Array& array, const char* what) {
  if (array.ndim() != 1) throw ValidationError(std::string(what) + " must be a 1-d array");
  const T* data = array.data();
  return std::vector<T>(data, data + array.shape(0));
}

Vec3 as_vec3(const DoubleArray& array) {
  if (array.ndim() != 1 || array.shape(0) != 3)
    throw ValidationError("query must be a 3-vector");
  return {array.data()[0], array.data()[1], array.data()[2]};
}

py::array_t<std::int64_t> keys_to_array(const std::vector<VoxelKey>& keys) {
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(keys.size()), py::ssize_t{3}});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    view(i, 0) = keys[i].ix;
    view(i, 1) = keys[i].iy;
    view(i, 2) = keys[i].iz;
  }
  return out;
}

FeatureMatrix matrix_from(const DoubleArray& values, std::vector<std::string> names) {
  if (values.ndim() != 2) throw ValidationError("features must be a 2-d array");
  if (static_cast<std::size_t>(values.shape(1)) != names.size())
    throw ValidationError("feature names do not match the column count");
  FeatureMatrix m;
  m.names = std::move(names);
  m.rows = static_cast<std::size_t>(values.shape(0));
  m.values.assign(values.data(), values.data() + values.size());
  return m;
}

py::dict report_dict(const EvalReport& report) {
  py::dict out;
  out["oa"] = report.oa;
  out["miou"] = report.miou;
  py::list classes;
  for (const ClassScore& score : report.classes) {
    py::dict row;
    row["name"] = score.name;
    row["truth_count"] = score.truth_count;
    row["present"] = score.present;
    if (score.present)
      row["iou"] = score.iou;
    else
      row["iou"] = py::none();
    classes.append(row);
  }
  out["classes"] = classes;
  out["text"] = render_text(report);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-resolution point cloud segmentation core";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("UNLABELED") = kUnlabeled;

  py::class_<PointCloud>(m, "PointCloud", "columnar point cloud")
      .def(py::init<>())
      .def("__len__", &PointCloud::size)
      .def("__eq__", [](const PointCloud& a, const PointCloud& b) { return a == b; })
      .def_property(
          "positions", [](const PointCloud& c) { return to_array(c.positions); },
          [](PointCloud& c, const DoubleArray& a) { c.positions = vec3_rows(a, "positions"); })
      .def_property(
          "colors", [](const PointCloud& c) { return to_array(c.colors); },
          [](PointCloud& c, const U8Array& a) { c.colors = color_rows(a); })
      .def_property(
          "labels", [](const PointCloud& c) { return to_array(c.labels); },
          [](PointCloud& c, const U32Array& a) {
            c.labels = column<ClassId>(a, "labels");
          })
      .def_property(
          "intensity", [](const PointCloud& c) { return to_array(c.intensity); },
          [](PointCloud& c, const F32Array& a) {
            c.intensity = column<float>(a, "intensity");
          })
      .def("has_colors", &PointCloud::has_colors)
      .def("has_labels", &PointCloud::has_labels)
      .def("has_intensity", &PointCloud::has_intensity)
      .def("validate", [](const PointCloud& c) { validate(c); });

  m.def("read_ply", &read_ply_file, py::arg("path"));
  m.def(
      "write_ply",
      [](const PointCloud& cloud, const std::string& path, bool binary) {
        write_ply_file(cloud, path, binary ? PlyFormat::BinaryLittleEndian : PlyFormat::Ascii);
      },
      py::arg("cloud"), py::arg("path"), py::arg("binary") = true);

  py::class_<SubsampleResult>(m, "Subsample", "one representative point per voxel")
      .def_property_readonly("cloud",
                             [](const SubsampleResult& s) { return s.low_cloud; })
      .def_property_readonly("rep_index",
                             [](const SubsampleResult& s) { return to_array(s.rep_index); })
      .def_property_readonly("voxel_keys",
                             [](const SubsampleResult& s) { return keys_to_array(s.voxel_of); })
      .def_property_readonly("origin",
                             [](const SubsampleResult& s) {
                               return to_array(std::vector<Vec3>{s.grid_params.origin});
                             })
      .def_property_readonly("voxel_size",
                             [](const SubsampleResult& s) { return s.grid_params.voxel_size; });

  m.def(
      "voxel_subsample",
      [](const PointCloud& cloud, double voxel_size) {
        return voxel_subsample(cloud, voxel_size);
      },
      py::arg("cloud"), py::arg("voxel_size"));

  py::class_<NeighborIndex>(m, "NeighborIndex", "exact k-nearest-neighbor index")
      .def(py::init([](const PointCloud& cloud) { return NeighborIndex(cloud.positions); }),
           py::arg("cloud"))
      .def(py::init([](const DoubleArray& points) {
             return NeighborIndex(vec3_rows(points, "points"));
           }),
           py::arg("points"))
      .def(
          "knn",
          [](const NeighborIndex& index, const DoubleArray& query, std::size_t k) {
            return to_array(index.knn(as_vec3(query), k));
          },
          py::arg("query"), py::arg("k"))
      .def(
          "nearest",
          [](const NeighborIndex& index, const DoubleArray& query) {
            return index.nearest(as_vec3(query));
          },
          py::arg("query"));

  py::class_<FeatureMatrix>(m, "Features", "per-point feature rows")
      .def(py::init([](const DoubleArray& values, std::vector<std::string> names) {
             return matrix_from(values, std::move(names));
           }),
           py::arg("values"), py::arg("names"))
      .def_property_readonly("names",
                             [](const FeatureMatrix& f) { return f.names; })
      .def_property_readonly("values",
                             [](const FeatureMatrix& f) {
                               py::array_t<double> out(
                                   {static_cast<py::ssize_t>(f.rows),
                                    static_cast<py::ssize_t>(f.cols())});
                               std::copy(f.values.begin(), f.values.end(),
                                         out.mutable_data());
                               return out;
                             })
      .def("__len__", [](const FeatureMatrix& f) { return f.rows; });

  m.def("eigen_features", &eigen_features, py::arg("cloud"), py::arg("k"),
        "geometric + color features from k-neighborhood covariance eigenvalues");

  py::class_<ClassifierModel>(m, "Model", "multinomial linear softmax classifier")
      .def_property_readonly("n_classes",
                             [](const ClassifierModel& m_) { return m_.n_classes; })
      .def_property_readonly("feature_names",
                             [](const ClassifierModel& m_) { return m_.feature_names; })
      .def_property_readonly("class_names",
                             [](const ClassifierModel& m_) { return m_.class_names; })
      .def_property_readonly("final_loss",
                             [](const ClassifierModel& m_) { return m_.final_loss; })
      .def_property_readonly("warnings",
                             [](const ClassifierModel& m_) { return m_.warnings; })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json, py::arg("text"))
      .def("save", [](const ClassifierModel& m_, const std::string& path) {
        write_model_file(m_, path);
      })
      .def_static("load", &read_model_file, py::arg("path"));

  m.def(
      "train",
      [](const FeatureMatrix& features, const U32Array& labels, std::size_t n_classes,
         double learning_rate, int epochs, std::uint64_t seed,
         std::vector<std::string> class_names) {
        TrainOptions options;
        options.learning_rate = learning_rate;
        options.epochs = epochs;
        options.seed = seed;
        return train(features, column<ClassId>(labels, "labels"), n_classes, options,
                     std::move(class_names));
      },
      py::arg("features"), py::arg("labels"), py::arg("n_classes"),
      py::arg("learning_rate") = 0.2, py::arg("epochs") = 100, py::arg("seed") = 42,
      py::arg("class_names") = std::vector<std::string>{});

  m.def(
      "predict",
      [](const ClassifierModel& model, const FeatureMatrix& features) {
        const Prediction p = predict(model, features);
        py::array_t<double> probabilities(
            {static_cast<py::ssize_t>(p.labels.size()),
             static_cast<py::ssize_t>(p.n_classes)});
        std::copy(p.probabilities.begin(), p.probabilities.end(),
                  probabilities.mutable_data());
        return py::make_tuple(to_array(p.labels), probabilities);
      },
      py::arg("model"), py::arg("features"), "returns (labels, probabilities)");

  m.def(
      "voxel_project",
      [](const U32Array& low_labels, const SubsampleResult& sub, const PointCloud& full) {
        return to_array(voxel_project(column<ClassId>(low_labels, "labels"), sub, full));
      },
      py::arg("low_labels"), py::arg("subsample"), py::arg("full_cloud"),
      "carry each voxel representative's label to every point of its voxel");

  m.def(
      "closest_point_project",
      [](const PointCloud& partial, const PointCloud& targets) {
        return to_array(closest_point_project(partial, targets));
      },
      py::arg("partial"), py::arg("targets"),
      "label each target with its nearest labeled source point's class");

  m.def(
      "evaluate",
      [](const U32Array& truth, const U32Array& pred, std::size_t n_classes,
         std::vector<std::string> class_names) {
        return report_dict(evaluate(column<ClassId>(truth, "truth"),
                                    column<ClassId>(pred, "pred"), n_classes,
                                    std::move(class_names)));
      },
      py::arg("truth"), py::arg("pred"), py::arg("n_classes"),
      py::arg("class_names") = std::vector<std::string>{},
      "overall accuracy, per-class IoU and mIoU as a dict");

  py::class_<PipelineConfig>(m, "Config", "class universe, merge map and hyperparameters")
      .def_property_readonly("class_names",
                             [](const PipelineConfig& c) { return c.schema.names(); })
      .def_property_readonly("merged_names",
                             [](const PipelineConfig& c) { return c.merged.names; })
      .def_property_readonly("voxel_size",
                             [](const PipelineConfig& c) { return c.voxel_size; })
      .def_property_readonly("k_neighbors",
                             [](const PipelineConfig& c) { return c.k_neighbors; });

  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("read_config", &read_config_file, py::arg("path"));

  py::class_<PipelineModels>(m, "PipelineModels",
                             "stage-one model plus one stage-two model per merged class")
      .def_property_readonly("stage1",
                             [](const PipelineModels& m_) { return m_.stage1; })
      .def_property_readonly("stage2",
                             [](const PipelineModels& m_) { return m_.stage2; });

  m.def("train_pipeline", &train_pipeline, py::arg("clouds"), py::arg("config"),
        "fit the low-resolution stage and each concatenated class's full-resolution stage");

  m.def(
      "run_pipeline",
      [](const PointCloud& cloud, const PipelineConfig& config, const PipelineModels& models) {
        const PipelineResult result = run_pipeline(cloud, config, models);
        py::dict out;
        out["labels"] = to_array(result.labels);
        out["stage1_labels"] = to_array(result.stage1_labels);
        out["stage2_points"] = result.stats.stage2_points;
        out["fallback_count"] = result.stats.fallback_count;
        out["stats"] = stats_to_json(result.stats);
        return out;
      },
      py::arg("cloud"), py::arg("config"), py::arg("models"),
      "segment a full-resolution cloud; returns labels and run statistics");

  m.def("set_thread_cap", &par::set_thread_cap, py::arg("n"),
        "limit worker threads; n <= 0 restores the hardware default");
}
