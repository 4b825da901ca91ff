#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

#include "fideval/counterexample.hpp"
#include "fideval/error.hpp"
#include "fideval/fidelity.hpp"
#include "fideval/image_io.hpp"
#include "fideval/iqa.hpp"
#include "fideval/resample.hpp"
#include "fideval/study.hpp"

namespace py = pybind11;
using namespace fideval;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImagePlane to_plane(const Array& a) {
    if (a.ndim() != 2) throw PreconditionError("expected a 2-D array (height, width)");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    std::vector<double> v(a.data(), a.data() + a.size());
    return {w, h, std::move(v)};
}

Array to_array(const ImagePlane& img) {
    Array out({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width())});
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

DownsampleMethod method_from(const std::string& name) {
    const auto m = parse_method(name);
    if (!m) throw PreconditionError("unknown down-sampling method '" + name + "'");
    return *m;
}

WarpDirection direction_from(const std::string& name) {
    if (name == "horizontal") return WarpDirection::horizontal;
    if (name == "vertical") return WarpDirection::vertical;
    throw PreconditionError("direction must be 'horizontal' or 'vertical'");
}

py::dict result_dict(const FidelityResult& r) {
    py::dict d;
    d["fd_db"] = r.fd_db;
    d["sigma"] = r.best_sigma;
    d["method"] = std::string(to_string(r.best_method));
    d["mv"] = py::make_tuple(r.best_mv.dx, r.best_mv.dy);
    d["evaluations"] = r.evaluations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fideval, m) {
    m.doc() = "Fidelity-based evaluation of super-resolution results.";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

    m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); },
          "Load a PNG or PGM file as a float64 luma array.", py::arg("path"));
    m.def("save_image",
          [](const Array& a, const std::filesystem::path& p) { return save_image(to_plane(a), p); },
          "Save as 8-bit PNG or PGM; returns the number of clamped samples.", py::arg("image"), py::arg("path"));

    m.def("downsample",
          [](const Array& a, const std::string& method, int factor) {
              return to_array(downsample(to_plane(a), method_from(method), factor));
          },
          "imresize-compatible down-sampling.", py::arg("image"), py::arg("method") = "bicubic", py::arg("factor") = 3);
    m.def("upsample_bicubic", [](const Array& a, int factor) { return to_array(upsample_bicubic(to_plane(a), factor)); },
          "imresize-compatible bicubic up-sampling.", py::arg("image"), py::arg("factor") = 3);
    m.def("upsample_replicate",
          [](const Array& a, int factor) { return to_array(upsample_replicate(to_plane(a), factor)); },
          "Pixel replication.", py::arg("image"), py::arg("factor") = 3);

    m.def("fidelity",
          [](const Array& sr, const Array& lr, std::optional<std::vector<double>> sigmas,
             std::optional<std::vector<std::string>> methods, int radius, int border, int factor, int jobs,
             bool early_exit) {
              const FidelitySearchConfig base;
              std::vector<DownsampleMethod> ms = base.methods();
              if (methods) {
                  ms.clear();
                  for (const auto& n : *methods) ms.push_back(method_from(n));
              }
              FidelitySearchConfig cfg(sigmas.value_or(base.sigmas()), ms, radius, border, factor);
              cfg.jobs = jobs;
              cfg.early_exit = early_exit;
              const auto a = to_plane(sr);
              const auto b = to_plane(lr);
              FidelityResult r;
              {
                  py::gil_scoped_release release;
                  r = fidelity(a, b, cfg);
              }
              return result_dict(r);
          },
          "Fidelity of an SR image to its LR input. Returns a dict with fd_db, sigma, method, mv and evaluations.",
          py::arg("sr"), py::arg("lr"), py::arg("sigmas") = py::none(), py::arg("methods") = py::none(),
          py::arg("radius") = FidelitySearchConfig::kDefaultRadius,
          py::arg("border") = FidelitySearchConfig::kDefaultBorder,
          py::arg("factor") = FidelitySearchConfig::kDefaultFactor, py::arg("jobs") = 1,
          py::arg("early_exit") = false);

    m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_plane(a), to_plane(b)); }, py::arg("a"),
          py::arg("b"));
    m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_plane(a), to_plane(b)); }, py::arg("a"),
          py::arg("b"));
    m.def("uqi", [](const Array& a, const Array& b) { return uqi(to_plane(a), to_plane(b)); }, py::arg("a"),
          py::arg("b"));

    m.def("contrast_enhance",
          [](const Array& a, double c) { return to_array(contrast_enhance(to_plane(a), ContrastParams{c})); },
          "E = A + c (A - 2x2 block means of A).", py::arg("image"), py::arg("c") = 4.0);
    m.def("warp",
          [](const Array& a, double max_mv, const std::string& direction) {
              return to_array(warp_image(to_plane(a), WarpParams{max_mv, direction_from(direction)}));
          },
          "Smooth spatially varying warp.", py::arg("image"), py::arg("max_mv") = 40.0,
          py::arg("direction") = "horizontal");
    m.def("verify_null_space",
          [](const Array& a, const Array& b, const std::string& method, int factor) {
              return verify_null_space(to_plane(a), to_plane(b), method_from(method), factor);
          },
          py::arg("a"), py::arg("b"), py::arg("method") = "box", py::arg("factor") = 2);

    m.def("generate_pairs",
          [](const std::vector<std::string>& images, const std::vector<std::string>& methods, std::uint64_t seed) {
              py::list out;
              for (const auto& p : generate_pairs(images, methods, seed)) {
                  py::dict d;
                  d["pair_id"] = p.pair_id;
                  d["image"] = p.image;
                  d["method_left"] = p.method_left;
                  d["method_right"] = p.method_right;
                  out.append(d);
              }
              return out;
          },
          py::arg("images"), py::arg("methods"), py::arg("seed") = 0);

    m.def("run_study",
          [](const std::vector<std::string>& images, const std::vector<std::string>& methods, std::uint64_t seed,
             const std::vector<std::tuple<std::string, std::string, std::string>>& events, double threshold) {
              const PairIndex index(generate_pairs(images, methods, seed));
              std::vector<ChoiceEvent> ev;
              for (const auto& [annotator, pair_id, choice] : events) {
                  const auto c = parse_choice(choice);
                  if (!c) throw PreconditionError("choice must be 'left' or 'right'");
                  ev.push_back({annotator, pair_id, *c, 0});
              }
              const auto r = run_study(index, ev, threshold);
              py::dict d;
              d["step1"] = r.step1.preferred;
              d["step2"] = r.step2.preferred;
              d["outliers"] = r.outliers;
              d["agreement"] = r.agreement;
              d["preference_counts"] = preference_counts(r.step2, index);
              return d;
          },
          "Two-step ground truth from (annotator, pair_id, 'left'|'right') events.", py::arg("images"),
          py::arg("methods"), py::arg("seed"), py::arg("events"), py::arg("threshold") = 0.70);
}
