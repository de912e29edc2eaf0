#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "addn/aff.hpp"
#include "addn/audio.hpp"
#include "addn/checkpoint.hpp"
#include "addn/commands.hpp"
#include "addn/config.hpp"
#include "addn/ddl.hpp"
#include "addn/error.hpp"
#include "addn/gradcheck.hpp"
#include "addn/losses.hpp"
#include "addn/metrics.hpp"
#include "addn/ops.hpp"
#include "addn/report.hpp"
#include "addn/runtime.hpp"

namespace py = pybind11;
using namespace addn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  if (shape.empty()) shape = {1};
  return Tensor::from_data(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  const auto d = t.data();
  std::copy(d.begin(), d.end(), out.mutable_data());
  return out;
}

RunConfig run_config(const py::dict& options) {
  ConfigPairs pairs;
  for (const auto& [key, value] : options) {
    std::string text;
    if (py::isinstance<py::bool_>(value)) text = value.cast<bool>() ? "true" : "false";
    else text = py::str(value).cast<std::string>();
    pairs.emplace_back(key.cast<std::string>(), text);
  }
  return parse_config(pairs);
}

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["se"] = r.se;
  d["sp"] = r.sp;
  d["score"] = r.score;
  py::list rows;
  for (const auto& row : r.confusion) rows.append(py::cast(std::vector<std::uint64_t>(row.begin(), row.end())));
  d["confusion"] = rows;
  return d;
}

// Runs a command with its console output captured; returns (exit code, text).
template <typename Fn>
std::pair<int, std::string> captured(Fn&& fn) {
  std::ostringstream out;
  int code;
  {
    py::gil_scoped_release release;
    code = fn(out);
  }
  return {code, out.str()};
}

}  // namespace

PYBIND11_MODULE(_addn, m) {
  m.doc() = "Adaptive differential denoising network: core operations and CLI commands";
  configure_allocator();

  auto base = py::register_exception<Error>(m, "AddnError");
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<MissingFileError>(m, "MissingFileError", base);
  py::register_exception<DataFormatError>(m, "DataFormatError", base);
  py::register_exception<CheckpointError>(m, "CheckpointError", base);
  py::register_exception<UsageError>(m, "UsageError", base);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base);

  m.def("fft2", [](const Array& x) {
    const ComplexTensor s = fft2(to_tensor(x));
    return py::make_tuple(to_array(s.re), to_array(s.im));
  }, py::arg("x"), "Unnormalized 2D DFT of a real matrix, as (re, im).");
  m.def("ifft2", [](const Array& re, const Array& im, bool require_real) {
    return to_array(ifft2({to_tensor(re), to_tensor(im)}, require_real));
  }, py::arg("re"), py::arg("im"), py::arg("require_real") = true);
  m.def("soft_shrink", [](const Array& x, double alpha) { return to_array(soft_shrink(to_tensor(x), alpha)); },
        py::arg("x"), py::arg("alpha"));

  m.def("aff_forward", [](const Array& x, const Array& w1, const Array& b1, const Array& w2, double b2, double alpha,
                          bool residual) {
    AffParams p{to_tensor(w1), to_tensor(b1), to_tensor(w2), Tensor::full({1}, b2), alpha};
    return to_array(aff_forward(to_tensor(x), p, residual));
  }, py::arg("x"), py::arg("w1"), py::arg("b1"), py::arg("w2"), py::arg("b2"), py::arg("alpha") = 0.02,
        py::arg("residual") = false, "Adaptive frequency filter with mask MLP weights w1 [2xH], b1 [H], w2 [Hx1].");

  m.def("mhda", [](const Array& x, const Array& wq, const Array& wk, const Array& wv, const Array& wo,
                   const Array& lambda, std::size_t heads, bool differential) {
    MhdaParams p{to_tensor(wq), to_tensor(wk), to_tensor(wv), to_tensor(wo), to_tensor(lambda), heads};
    return to_array(mhda(to_tensor(x), p, differential));
  }, py::arg("x"), py::arg("wq"), py::arg("wk"), py::arg("wv"), py::arg("wo"), py::arg("lam"), py::arg("heads"),
        py::arg("differential") = true);

  m.def("smoothed_target", [](std::size_t label, double epsilon, std::size_t classes) {
    return smoothed_target(label, epsilon, classes);
  }, py::arg("label"), py::arg("epsilon") = 0.2, py::arg("classes") = kNumClasses);
  m.def("ce_loss", [](const Array& logits, std::size_t label) { return ce_loss(to_tensor(logits), label).item(); },
        py::arg("logits"), py::arg("label"));
  m.def("compute_metrics", [](const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
    return metrics_dict(compute_metrics(confusion_from(truth, predicted)));
  }, py::arg("truth"), py::arg("predicted"));
  m.def("format_percent", &format_percent, py::arg("fraction"));

  m.def("mel_spectrogram", [](const Array& samples, int sample_rate) {
    AudioClip clip;
    clip.samples.assign(samples.data(), samples.data() + samples.size());
    clip.sample_rate = sample_rate;
    return to_array(preprocess(clip, MelExtractor{}).values);
  }, py::arg("samples"), py::arg("sample_rate"),
        "Resample to 16 kHz, fix to 8 s, peak-normalize and return the 249x64 log-mel spectrogram.");

  m.def("config_keys", &config_keys);
  m.def("config_text", [](const py::dict& options) { return to_text(run_config(options)); },
        "Validated configuration text for the given key/value overrides.");

  m.def("train", [](const py::dict& options) {
    const RunConfig c = run_config(options);
    return captured([&](std::ostream& out) { return cmd_train(c, out); });
  }, "Runs `addn train` with the given options; returns (exit code, console text).");
  m.def("evaluate", [](const py::dict& options) {
    const RunConfig c = run_config(options);
    return captured([&](std::ostream& out) { return cmd_eval(c, out); });
  });
  m.def("synth", [](const py::dict& options) {
    const RunConfig c = run_config(options);
    return captured([&](std::ostream& out) { return cmd_synth(c, out); });
  });
  m.def("gradcheck", [](std::uint64_t seed, bool include_model) {
    GradcheckSuiteConfig c;
    c.seed = seed;
    c.include_model = include_model;
    GradcheckReport r;
    {
      py::gil_scoped_release release;
      r = run_gradcheck_suite(c);
    }
    return py::make_tuple(r.passed(), format_gradcheck_report(r));
  }, py::arg("seed") = 0, py::arg("include_model") = true);
  m.def("report", [](const std::vector<std::filesystem::path>& logs) { return report_from_logs(logs); });
  m.def("checkpoint_tensors", [](const std::filesystem::path& path) {
    py::dict d;
    for (const auto& [name, t] : load_checkpoint(path).tensors) d[py::str(name)] = to_array(t);
    return d;
  });
}
