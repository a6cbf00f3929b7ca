#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <thread>

#include "forensight/config.hpp"
#include "forensight/error.hpp"
#include "forensight/gateway.hpp"
#include "forensight/media.hpp"
#include "forensight/native_detectors.hpp"
#include "forensight/platform.hpp"
#include "forensight/serialization.hpp"

namespace py = pybind11;
namespace fs = forensight;
using nlohmann::json;

namespace {

fs::ByteView view_of(const py::bytes& data, std::string& holder) {
  holder = data;
  return {reinterpret_cast<const std::uint8_t*>(holder.data()), holder.size()};
}

py::object to_python(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
  }
}

fs::MediaFormat format_of(fs::ByteView bytes, const std::optional<std::string>& format) {
  if (!format) return fs::sniff_format(bytes);
  const auto parsed = fs::parse_format(*format);
  if (!parsed) throw fs::Error(fs::ErrorCode::invalid_request, "unknown format: " + *format);
  return *parsed;
}

/// Platform plus gateway serving on a background thread.
class Service {
 public:
  explicit Service(const fs::Settings& settings) {
    const auto registry = fs::default_registry();
    config_ = fs::load_config(settings, registry);
    platform_ = std::make_unique<fs::Platform>(config_);
    gateway_ = std::make_unique<fs::Gateway>(*platform_);
    const auto [host, port] = fs::split_bind_addr(config_.bind_addr);
    host_ = host;
    port_ = gateway_->bind(host, port);
    thread_ = std::thread([this] { gateway_->listen(); });
    while (!gateway_->running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  ~Service() { stop(); }

  void stop() {
    if (!thread_.joinable()) return;
    gateway_->stop();
    thread_.join();
  }

  int port() const { return port_; }
  const std::string& host() const { return host_; }
  bool running() const { return thread_.joinable() && gateway_->running(); }

 private:
  fs::ServiceConfig config_;
  std::unique_ptr<fs::Platform> platform_;
  std::unique_ptr<fs::Gateway> gateway_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the forensight deepfake-detection service";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fs::Error& e) {
      const auto cls = py::module_::import("forensight.errors").attr("ForensightError");
      const auto args = py::make_tuple(std::string(fs::code_name(e.code())), e.what(), fs::status_of(e.code()));
      PyErr_SetObject(cls.ptr(), args.ptr());
    }
  });

  m.def("sniff", [](const py::bytes& data) {
    std::string holder;
    return std::string(fs::to_string(fs::sniff_format(view_of(data, holder))));
  }, py::arg("data"), "Media format from magic bytes: png, jpeg, avif, wav or mp3.");

  m.def("detect_image", [](const py::bytes& data, const std::optional<std::string>& format) {
    std::string holder;
    const auto bytes = view_of(data, holder);
    fs::DetectionResult result;
    {
      py::gil_scoped_release release;
      result = fs::run_native_frequency_detector(fs::decode_image(bytes, format_of(bytes, format)));
    }
    return to_python(fs::as_json(result));
  }, py::arg("data"), py::arg("format") = py::none(), "Run the spectral-energy image heuristic.");

  m.def("detect_audio", [](const py::bytes& data, const std::optional<std::string>& format) {
    std::string holder;
    const auto bytes = view_of(data, holder);
    fs::DetectionResult result;
    {
      py::gil_scoped_release release;
      result = fs::run_native_audio_detector(fs::decode_audio(bytes, format_of(bytes, format)));
    }
    return to_python(fs::as_json(result));
  }, py::arg("data"), py::arg("format") = py::none(), "Run the spectral-flatness audio heuristic.");

  m.def("high_frequency_ratio", [](const std::vector<double>& luma, int height, int width, std::optional<double> cutoff) {
    if (height <= 0 || width <= 0 || luma.size() != static_cast<std::size_t>(height) * width) {
      throw fs::Error(fs::ErrorCode::invalid_request, "luma must hold height * width values");
    }
    return fs::high_frequency_ratio(fs::DecodedImage{width, height, luma},
                                    cutoff.value_or(fs::FrequencyDetectorConfig{}.radial_cutoff));
  }, py::arg("luma"), py::arg("height"), py::arg("width"), py::arg("cutoff") = py::none());

  m.def("frame_flatness", [](const std::vector<double>& samples, int sample_rate) {
    return fs::frame_flatness(fs::DecodedAudio{sample_rate, samples});
  }, py::arg("samples"), py::arg("sample_rate") = 16000);

  m.def("openapi_document", [] { return to_python(fs::openapi_document()); });

  m.def("route_table", [] {
    py::list out;
    for (const auto& r : fs::route_table()) {
      py::list errors;
      for (auto c : r.errors) errors.append(std::string(fs::code_name(c)));
      out.append(py::dict(py::arg("method") = r.method, py::arg("path") = r.path,
                          py::arg("requires_auth") = r.requires_auth, py::arg("operation_id") = r.operation_id,
                          py::arg("success_status") = r.success_status, py::arg("errors") = errors));
    }
    return out;
  });

  m.def("error_statuses", [] {
    py::dict out;
    for (auto c : fs::all_error_codes()) out[py::str(std::string(fs::code_name(c)))] = fs::status_of(c);
    return out;
  }, "Every error code with its HTTP status.");

  m.def("detectors", [](const std::optional<std::string>& modality) {
    std::optional<fs::Modality> filter;
    if (modality) {
      filter = fs::parse_modality(*modality);
      if (!filter) throw fs::Error(fs::ErrorCode::invalid_request, "modality must be image or audio");
    }
    py::list out;
    for (const auto& d : fs::default_registry().list(filter)) out.append(to_python(fs::as_json(d)));
    return out;
  }, py::arg("modality") = py::none());

  py::class_<Service>(m, "Service")
      .def(py::init<const fs::Settings&>(), py::arg("settings"), py::call_guard<py::gil_scoped_release>())
      .def("stop", &Service::stop, py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("port", &Service::port)
      .def_property_readonly("host", &Service::host)
      .def_property_readonly("running", &Service::running);
}
