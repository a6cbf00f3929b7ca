#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "forensight/config.hpp"
#include "forensight/gateway.hpp"
#include "forensight/native_detectors.hpp"
#include "forensight/platform.hpp"
#include "forensight/serialization.hpp"

namespace fs = forensight;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fs::Error(fs::ErrorCode::invalid_request, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::Settings gather_settings(const std::string& config_file) {
  fs::Settings settings;
  if (!config_file.empty()) settings = fs::read_settings_file(config_file);
  // Environment wins over the file.
  for (auto& [k, v] : fs::environment_settings()) settings[k] = v;
  return settings;
}

int serve(const std::string& config_file) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto registry = fs::default_registry();
  const auto config = fs::load_config(gather_settings(config_file), registry);
  fs::Platform platform(config);
  fs::Gateway gateway(platform);
  const auto [host, port] = fs::split_bind_addr(config.bind_addr);
  const int bound = gateway.bind(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    gateway.stop();
  });
  gateway.listen();
  // listen() also returns if the server fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forensight: deepfake-detection service"};
  app.require_subcommand(1);

  std::string config_file;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service (configured by environment / config file)");
  serve_cmd->add_option("-c,--config", config_file, "JSON file of configuration keys");

  std::string store_url;
  auto* migrate_cmd = app.add_subcommand("migrate", "Apply schema migrations and print the schema version");
  migrate_cmd->add_option("store", store_url, "Store URL (sqlite:///path or a path)")->required();

  std::vector<std::string> sniff_files;
  auto* sniff_cmd = app.add_subcommand("sniff", "Identify media formats from magic bytes");
  sniff_cmd->add_option("files", sniff_files)->required();

  std::string detector_id = "freq-heuristic-v1";
  std::string detect_file;
  auto* detect_cmd = app.add_subcommand("detect", "Run a native detector on a local file");
  detect_cmd->add_option("-d,--detector", detector_id, "freq-heuristic-v1 or audio-flatness-v1");
  detect_cmd->add_option("file", detect_file)->required();

  std::string modality_filter;
  auto* detectors_cmd = app.add_subcommand("detectors", "List registered detectors");
  detectors_cmd->add_option("-m,--modality", modality_filter, "image or audio");

  auto* openapi_cmd = app.add_subcommand("openapi", "Print the OpenAPI document");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_file);
    if (*migrate_cmd) {
      auto store = fs::Store::open(store_url);
      std::cout << store->migrate() << '\n';
      return 0;
    }
    if (*sniff_cmd) {
      int status = 0;
      for (const auto& path : sniff_files) {
        try {
          const auto bytes = read_file(path);
          const auto format = fs::sniff_format(bytes);
          std::cout << path << '\t' << fs::to_string(format) << '\t' << fs::to_string(fs::modality_of(format)) << '\n';
        } catch (const fs::Error& e) {
          std::cout << path << '\t' << fs::code_name(e.code()) << '\n';
          status = 1;
        }
      }
      return status;
    }
    if (*detect_cmd) {
      const auto bytes = read_file(detect_file);
      const auto format = fs::sniff_format(bytes);
      fs::DetectionResult result;
      if (detector_id == "freq-heuristic-v1") {
        result = fs::run_native_frequency_detector(fs::decode_image(bytes, format));
      } else if (detector_id == "audio-flatness-v1") {
        result = fs::run_native_audio_detector(fs::decode_audio(bytes, format));
      } else {
        throw fs::Error(fs::ErrorCode::unknown_detector, detector_id + " is not a native detector");
      }
      std::cout << fs::as_json(result).dump(2) << '\n';
      return 0;
    }
    if (*detectors_cmd) {
      std::optional<fs::Modality> filter;
      if (!modality_filter.empty()) {
        filter = fs::parse_modality(modality_filter);
        if (!filter) throw fs::Error(fs::ErrorCode::invalid_request, "modality must be image or audio");
      }
      json list = json::array();
      for (const auto& d : fs::default_registry().list(filter)) list.push_back(fs::as_json(d));
      std::cout << list.dump(2) << '\n';
      return 0;
    }
    if (*openapi_cmd) {
      std::cout << fs::openapi_document().dump(2) << '\n';
      return 0;
    }
  } catch (const fs::Error& e) {
    std::cerr << fs::code_name(e.code()) << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
