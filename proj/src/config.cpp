#include "forensight/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include <json.hpp>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

extern char** environ;

namespace forensight {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::invalid_config, why); }

std::string get(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  return it == s.end() ? std::string() : it->second;
}

int to_int(const std::string& key, const std::string& value, int lo, int hi) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out < lo || out > hi) {
    invalid(key + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    std::string item = value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = item.find_first_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, item.find_last_not_of(" \t") - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string adapter_env_suffix(std::string_view detector_id) {
  std::string out;
  for (unsigned char c : detector_id) out.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
  return out;
}

Settings environment_settings() {
  Settings out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string_view::npos) out.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config file " + path.string());
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) invalid("config file must be a JSON object");
  Settings out;
  for (const auto& [key, value] : doc.items()) {
    out[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return out;
}

std::pair<std::string, int> split_bind_addr(const std::string& bind_addr) {
  const auto colon = bind_addr.rfind(':');
  if (colon == std::string::npos || colon == 0) invalid("BIND_ADDR must look like host:port");
  return {bind_addr.substr(0, colon), to_int("BIND_ADDR port", bind_addr.substr(colon + 1), 0, 65535)};
}

ServiceConfig load_config(const Settings& s, const DetectorRegistry& registry) {
  ServiceConfig c;
  if (auto v = get(s, "BIND_ADDR"); !v.empty()) c.bind_addr = v;
  split_bind_addr(c.bind_addr);
  c.store_url = get(s, "STORE_URL");
  c.blob_root = get(s, "BLOB_ROOT");
  c.token_key = get(s, "TOKEN_KEY");
  if (c.token_key.empty()) invalid("TOKEN_KEY is required");
  if (c.store_url.empty()) invalid("STORE_URL is required");
  if (c.blob_root.empty()) invalid("BLOB_ROOT is required");

  for (const auto& d : registry.list()) {
    if (d.adapter_kind != AdapterKind::remote_model) continue;
    auto url = get(s, "ADAPTER_URL_" + adapter_env_suffix(d.detector_id));
    if (url.empty()) url = get(s, "ADAPTER_URL_" + d.detector_id);
    if (!url.empty()) c.adapter_urls[d.detector_id] = url;
  }
  c.chat_url = get(s, "CHAT_URL");
  c.transcribe_url = get(s, "TRANSCRIBE_URL");
  c.ui_origin = get(s, "UI_ORIGIN");
  c.admin_emails = split_list(get(s, "ADMIN_EMAIL"));
  c.feedback_salt = get(s, "FEEDBACK_SALT");
  if (c.feedback_salt.empty()) {
    c.feedback_salt = crypto::to_hex(crypto::hmac_sha256(crypto::as_bytes(c.token_key),
                                                         crypto::as_bytes("feedback-submitter-salt")));
  }
  if (auto v = get(s, "BCRYPT_COST"); !v.empty()) c.bcrypt_cost = to_int("BCRYPT_COST", v, 4, 31);
  if (auto v = get(s, "ADAPTER_TIMEOUT_MS"); !v.empty()) {
    c.adapter_timeout = AdapterTimeout(to_int("ADAPTER_TIMEOUT_MS", v, 1, 3'600'000));
  }
  if (auto v = get(s, "WORKER_THREADS"); !v.empty()) c.worker_threads = to_int("WORKER_THREADS", v, 1, 1024);
  return c;
}

}  // namespace forensight
