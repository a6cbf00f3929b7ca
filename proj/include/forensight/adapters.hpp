#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forensight/detectors.hpp"
#include "forensight/media.hpp"

namespace forensight {

using AdapterTimeout = std::chrono::milliseconds;
inline constexpr AdapterTimeout kDefaultAdapterTimeout{30'000};

/// POSTs a JSON body to base_url + path. No retries. Throws
/// adapter_unreachable (connect failure, missing endpoint), adapter_timeout
/// (no response in time), or malformed_response (non-200, not JSON).
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, AdapterTimeout timeout);

/// Client for model servers speaking POST /v1/infer.
class RemoteDetectorClient {
 public:
  RemoteDetectorClient(std::map<std::string, std::string> endpoints,
                       AdapterTimeout timeout = kDefaultAdapterTimeout);

  /// image_size, when known, bounds the returned face boxes.
  DetectionResult infer(const DetectorDescriptor& detector, ByteView media, MediaFormat format,
                        std::optional<std::pair<int, int>> image_size = std::nullopt) const;

  bool has_endpoint(const std::string& detector_id) const { return endpoints_.count(detector_id) > 0; }

 private:
  std::map<std::string, std::string> endpoints_;
  AdapterTimeout timeout_;
};

/// Maps a model-server response body onto a DetectionResult, enforcing the
/// score range, label/threshold coherence and face box bounds.
DetectionResult parse_inference_response(const nlohmann::json& body, Modality modality,
                                         std::optional<std::pair<int, int>> image_size);

struct ChatMessage {
  std::string role;  // "user" | "assistant"
  std::string text;
};

struct ChatAttachment {
  Modality modality = Modality::image;
  MediaFormat format = MediaFormat::png;
  std::vector<std::uint8_t> bytes;
};

/// POST /v1/chat -> {"text": str}
class ChatClient {
 public:
  ChatClient(std::string base_url, AdapterTimeout timeout = kDefaultAdapterTimeout);
  std::string chat(const std::string& model, const std::vector<ChatMessage>& messages,
                   const ChatAttachment* attachment) const;

 private:
  std::string base_url_;
  AdapterTimeout timeout_;
};

/// POST /v1/transcribe -> {"transcript": str}
class TranscriptionClient {
 public:
  TranscriptionClient(std::string base_url, AdapterTimeout timeout = kDefaultAdapterTimeout);
  std::string transcribe(MediaFormat format, ByteView media) const;

 private:
  std::string base_url_;
  AdapterTimeout timeout_;
};

}  // namespace forensight
