#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forensight/adapters.hpp"
#include "forensight/detectors.hpp"
#include "forensight/media.hpp"

namespace forensight {

using Settings = std::map<std::string, std::string>;

struct ServiceConfig {
  std::string bind_addr = "127.0.0.1:8080";
  std::string store_url;
  std::string blob_root;
  std::string token_key;
  std::map<std::string, std::string> adapter_urls;  // detector_id -> base url
  std::string chat_url;
  std::string transcribe_url;
  std::string ui_origin;
  std::vector<std::string> admin_emails;
  std::string feedback_salt;
  int bcrypt_cost = 10;
  AdapterTimeout adapter_timeout = kDefaultAdapterTimeout;
  IngestLimits limits;
  int worker_threads = 16;
};

/// Environment variable suffix for a detector id: upper-cased, with every
/// non-alphanumeric replaced by '_' ("pg-fdd" -> "PG_FDD").
std::string adapter_env_suffix(std::string_view detector_id);

/// Current process environment as key/value pairs.
Settings environment_settings();

/// A flat JSON object of the same keys as the environment variables.
Settings read_settings_file(const std::filesystem::path& path);

/// Builds and validates the configuration. Keys: BIND_ADDR, STORE_URL,
/// BLOB_ROOT, TOKEN_KEY, ADAPTER_URL_<id>, CHAT_URL, TRANSCRIBE_URL,
/// UI_ORIGIN, ADMIN_EMAIL (comma separated), FEEDBACK_SALT, BCRYPT_COST,
/// ADAPTER_TIMEOUT_MS, WORKER_THREADS. Throws invalid_config when a
/// required key (TOKEN_KEY, STORE_URL, BLOB_ROOT) is missing or a value is
/// malformed.
ServiceConfig load_config(const Settings& settings, const DetectorRegistry& registry);

/// "host:port" -> pair; throws invalid_config.
std::pair<std::string, int> split_bind_addr(const std::string& bind_addr);

}  // namespace forensight
