#include "forensight/adapters.hpp"

#include <httplib.h>

#include <cmath>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::malformed_response, "adapter response: " + why);
}

// "http://host:port/prefix" -> {"http://host:port", "/prefix"}
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    throw Error(ErrorCode::adapter_unreachable, "unsupported adapter url: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

json post_json(const std::string& base_url, const std::string& path, const json& body,
               AdapterTimeout timeout) {
  if (base_url.empty()) throw Error(ErrorCode::adapter_unreachable, "no adapter endpoint configured");
  const auto [host, prefix] = split_url(base_url);
  httplib::Client client(host);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto result = client.Post(prefix + path, body.dump(), "application/json");
  if (!result) {
    switch (result.error()) {
      case httplib::Error::Read:
      case httplib::Error::ConnectionTimeout:
        throw Error(ErrorCode::adapter_timeout, "adapter did not answer within the timeout");
      default:
        throw Error(ErrorCode::adapter_unreachable,
                    "adapter unreachable: " + httplib::to_string(result.error()));
    }
  }
  if (result->status != 200) malformed("status " + std::to_string(result->status));
  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) malformed("body is not a JSON object");
  return parsed;
}

DetectionResult parse_inference_response(const json& body, Modality modality,
                                         std::optional<std::pair<int, int>> image_size) {
  if (!body.contains("label") || !body["label"].is_string()) malformed("missing label");
  const auto label = parse_label(body["label"].get<std::string>());
  if (!label) malformed("label must be real or fake");
  if (!body.contains("score") || !body["score"].is_number()) malformed("missing score");
  const double score = body["score"].get<double>();
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) malformed("score outside [0,1]");
  if (*label != label_for(score)) malformed("label disagrees with the 0.5 threshold");

  DetectionResult result{*label, score, std::nullopt, 0};
  if (body.contains("latency_ms")) {
    if (!body["latency_ms"].is_number_integer() || body["latency_ms"].get<std::int64_t>() < 0) {
      malformed("latency_ms must be a non-negative integer");
    }
    result.latency_ms = body["latency_ms"].get<std::int64_t>();
  }
  if (body.contains("faces") && !body["faces"].is_null()) {
    if (modality != Modality::image) malformed("faces are only valid for images");
    if (!body["faces"].is_array()) malformed("faces must be an array");
    std::vector<FaceRegion> faces;
    for (const auto& face : body["faces"]) {
      if (!face.is_object() || !face.contains("bbox") || !face["bbox"].is_array() ||
          face["bbox"].size() != 4 || !face.contains("score") || !face["score"].is_number()) {
        malformed("face entries need bbox[4] and score");
      }
      for (const auto& v : face["bbox"]) {
        if (!v.is_number_integer()) malformed("bbox values must be integers");
      }
      FaceRegion region{face["bbox"][0].get<int>(), face["bbox"][1].get<int>(),
                        face["bbox"][2].get<int>(), face["bbox"][3].get<int>(),
                        face["score"].get<double>()};
      if (region.x < 0 || region.y < 0 || region.w < 1 || region.h < 1) malformed("bbox out of range");
      if (image_size && (region.x + region.w > image_size->first || region.y + region.h > image_size->second)) {
        malformed("bbox exceeds image bounds");
      }
      if (!std::isfinite(region.score) || region.score < 0.0 || region.score > 1.0) {
        malformed("face score outside [0,1]");
      }
      faces.push_back(region);
    }
    result.faces = std::move(faces);
  }
  return result;
}

RemoteDetectorClient::RemoteDetectorClient(std::map<std::string, std::string> endpoints,
                                           AdapterTimeout timeout)
    : endpoints_(std::move(endpoints)), timeout_(timeout) {}

DetectionResult RemoteDetectorClient::infer(const DetectorDescriptor& detector, ByteView media,
                                            MediaFormat format,
                                            std::optional<std::pair<int, int>> image_size) const {
  const auto it = endpoints_.find(detector.detector_id);
  if (it == endpoints_.end()) {
    throw Error(ErrorCode::adapter_unreachable, "no endpoint configured for " + detector.detector_id);
  }
  const json request = {{"detector_id", detector.detector_id},
                        {"modality", to_string(detector.modality)},
                        {"format", to_string(format)},
                        {"media_b64", crypto::base64_encode(media)}};
  const auto start = std::chrono::steady_clock::now();
  const json response = post_json(it->second, "/v1/infer", request, timeout_);
  auto result = parse_inference_response(response, detector.modality, image_size);
  if (!response.contains("latency_ms")) {
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  }
  return result;
}

ChatClient::ChatClient(std::string base_url, AdapterTimeout timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

std::string ChatClient::chat(const std::string& model, const std::vector<ChatMessage>& messages,
                             const ChatAttachment* attachment) const {
  json request = {{"model", model}, {"messages", json::array()}};
  for (const auto& m : messages) request["messages"].push_back({{"role", m.role}, {"text", m.text}});
  if (attachment) {
    request["attachment"] = {{"modality", to_string(attachment->modality)},
                             {"format", to_string(attachment->format)},
                             {"media_b64", crypto::base64_encode(attachment->bytes)}};
  }
  const json response = post_json(base_url_, "/v1/chat", request, timeout_);
  if (!response.contains("text") || !response["text"].is_string()) malformed("missing text");
  return response["text"].get<std::string>();
}

TranscriptionClient::TranscriptionClient(std::string base_url, AdapterTimeout timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

std::string TranscriptionClient::transcribe(MediaFormat format, ByteView media) const {
  const json request = {{"format", to_string(format)}, {"media_b64", crypto::base64_encode(media)}};
  const json response = post_json(base_url_, "/v1/transcribe", request, timeout_);
  if (!response.contains("transcript") || !response["transcript"].is_string()) {
    malformed("missing transcript");
  }
  return response["transcript"].get<std::string>();
}

}  // namespace forensight
