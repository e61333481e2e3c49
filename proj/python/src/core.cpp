#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "bliss/config.hpp"
#include "bliss/error.hpp"
#include "bliss/eventify.hpp"
#include "bliss/experiment.hpp"
#include "bliss/readout.hpp"
#include "bliss/roi.hpp"
#include "bliss/sampler.hpp"
#include "bliss/vit.hpp"
#include "bliss/weights.hpp"

namespace py = pybind11;
using namespace bliss;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using U16Array = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

KeyValueConfig load_or_default(const std::optional<std::filesystem::path>& path) {
  return path ? KeyValueConfig::load(*path) : KeyValueConfig{};
}

Grid<std::uint16_t> to_grid(const U16Array& a) {
  if (a.ndim() != 2) throw ContractError("expected a 2-D array (height, width)");
  Grid<std::uint16_t> g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(g.values().data(), a.data(), g.values().size_bytes());
  return g;
}

template <class T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::memcpy(out.mutable_data(), g.values().data(), g.values().size_bytes());
  return out;
}

py::array_t<float> tensor_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
  py::array_t<float> out(shape);
  std::memcpy(out.mutable_data(), t.data.data(), t.data.size() * sizeof(float));
  return out;
}

py::list specs_list(const std::vector<TensorSpec>& specs) {
  py::list out;
  for (const auto& [name, dims] : specs) out.append(py::make_tuple(name, py::tuple(py::cast(dims))));
  return out;
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["mode"] = std::string(to_string(s.mode));
  d["frames"] = s.frames;
  d["exposure_us"] = s.exposure * 1e6;
  d["latency_mean_us"] = s.latency_mean * 1e6;
  d["latency_max_us"] = s.latency_max * 1e6;
  d["fps"] = s.fps;
  d["stalls"] = s.stalls;
  d["target_rate"] = s.target_rate;
  d["lut_rate"] = s.lut_rate;
  d["sample_rate"] = s.sample_rate;
  d["retention"] = s.retention;
  d["compression"] = s.compression;
  d["roi_area_mean"] = s.roi_area_mean;
  d["gaze_err_v"] = s.gaze_error_vertical;
  d["gaze_err_h"] = s.gaze_error_horizontal;
  d["gaze_reused"] = s.gaze_reused;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "BlissCam simulator core";

  auto base = py::register_exception<Error>(m, "BlissError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<CorruptStreamError>(m, "CorruptStreamError", base.ptr());

  py::class_<WeightBundle>(m, "WeightBundle")
      .def(py::init<>())
      .def(
          "add",
          [](WeightBundle& b, const std::string& name, const FloatArray& a) {
            std::vector<std::uint32_t> dims(a.shape(), a.shape() + a.ndim());
            b.add(name, std::move(dims), std::vector<float>(a.data(), a.data() + a.size()));
          },
          py::arg("name"), py::arg("array"))
      .def("names",
           [](const WeightBundle& b) {
             std::vector<std::string> names;
             for (const auto& t : b.tensors()) names.push_back(t.name);
             return names;
           })
      .def("__len__", &WeightBundle::size)
      .def("__contains__", &WeightBundle::contains)
      .def("__getitem__",
           [](const WeightBundle& b, const std::string& name) {
             const Tensor* t = b.find(name);
             if (t == nullptr) throw py::key_error(name);
             return tensor_array(*t);
           })
      .def("__eq__", [](const WeightBundle& a, const WeightBundle& b) { return a == b; })
      .def("to_bytes",
           [](const WeightBundle& b) {
             const auto bytes = b.to_bytes();
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def_static("from_bytes",
                  [](const py::bytes& data) {
                    const std::string s = data;
                    return WeightBundle::from_bytes(
                        std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
                  })
      .def_static("read", &read_bundle, py::arg("path"))
      .def("write", [](const WeightBundle& b, const std::filesystem::path& p) { write_bundle(b, p); }, py::arg("path"));

  m.def(
      "roi_tensor_specs",
      [](const std::optional<std::filesystem::path>& config) {
        return specs_list(RoiNetConfig::from_config(load_or_default(config)).tensor_specs());
      },
      py::arg("config") = py::none());
  m.def(
      "vit_tensor_specs",
      [](const std::optional<std::filesystem::path>& config) {
        return specs_list(VitConfig::from_config(load_or_default(config)).tensor_specs());
      },
      py::arg("config") = py::none());

  py::class_<RoiNet>(m, "RoiNet")
      .def(py::init([](const WeightBundle& w, const std::optional<std::filesystem::path>& config) {
             return RoiNet(w, RoiNetConfig::from_config(load_or_default(config)));
           }),
           py::arg("weights"), py::arg("config") = py::none())
      .def_property_readonly("input_shape",
                             [](const RoiNet& n) {
                               const auto s = n.config().input_shape();
                               return py::make_tuple(s.channels, s.height, s.width);
                             })
      .def_property_readonly("macs", [](const RoiNet& n) { return n.config().macs(); })
      .def("forward", [](const RoiNet& n, const FloatArray& input) {
        const auto out = n.forward(std::vector<float>(input.data(), input.data() + input.size()));
        return std::vector<float>(out.begin(), out.end());
      });

  py::class_<VitSegmenter>(m, "VitSegmenter")
      .def(py::init([](const WeightBundle& w, const std::optional<std::filesystem::path>& config) {
             return VitSegmenter(w, VitConfig::from_config(load_or_default(config)));
           }),
           py::arg("weights"), py::arg("config") = py::none())
      .def(
          "forward",
          [](const VitSegmenter& v, const U16Array& sparse_roi) {
            const auto g = to_grid(sparse_roi);
            const auto out = v.run(g, Roi{0, 0, g.width() - 1, g.height() - 1}, 0);
            py::array_t<float> logits({out.logits.rows(), out.logits.cols()});
            std::memcpy(logits.mutable_data(), out.logits.data(), sizeof(float) * static_cast<std::size_t>(out.logits.size()));
            return py::make_tuple(logits, to_array(out.seg.labels));
          },
          py::arg("sparse_roi"), "Returns (token logits, per-pixel labels) for an ROI-sized uint16 array.");

  m.def(
      "eventify",
      [](const U16Array& prev, const U16Array& curr, int sigma) { return to_array(eventify(to_grid(prev), to_grid(curr), sigma).bits); },
      py::arg("prev"), py::arg("curr"), py::arg("sigma"));

  m.def(
      "rle_encode",
      [](const U16Array& values, std::array<int, 4> roi, int frame) {
        ReadoutBuffer b{std::vector<std::uint16_t>(values.data(), values.data() + values.size()),
                        Roi{roi[0], roi[1], roi[2], roi[3]}, frame};
        const auto bytes = rle_encode(b).to_bytes();
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("values"), py::arg("roi"), py::arg("frame") = 0);
  m.def(
      "rle_decode",
      [](const py::bytes& data) {
        const std::string s = data;
        const auto b = rle_decode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        py::array_t<std::uint16_t> values(static_cast<py::ssize_t>(b.values.size()));
        std::memcpy(values.mutable_data(), b.values.data(), b.values.size() * sizeof(std::uint16_t));
        return py::make_tuple(values, py::make_tuple(b.roi.x1, b.roi.y1, b.roi.x2, b.roi.y2), b.frame_index);
      },
      py::arg("data"));

  m.def(
      "binomial_lut",
      [](double p) {
        const auto lut = CalibrationLut::binomial(p);
        return std::vector<double>(lut.rates().begin(), lut.rates().end());
      },
      py::arg("p"));
  m.def(
      "theta_for",
      [](double p, double target) { return CalibrationLut::binomial(p).theta_for(target); }, py::arg("p"), py::arg("target"));

  m.def(
      "run",
      [](const std::filesystem::path& config, const std::map<std::string, std::string>& overrides) {
        auto kv = KeyValueConfig::load(config);
        for (const auto& [k, v] : overrides) kv.set(k, v);
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = execute(RunConfig::from_config(kv, config.parent_path()));
        }
        py::dict d = summary_dict(out.summary);
        d["energy_uj_per_frame"] = out.energy.total_per_frame() * 1e6;
        return d;
      },
      py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
      "Runs one simulation and returns its summary.");
}
