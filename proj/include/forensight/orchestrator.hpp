#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forensight/accounts.hpp"
#include "forensight/adapters.hpp"
#include "forensight/detectors.hpp"
#include "forensight/media.hpp"
#include "forensight/native_detectors.hpp"

namespace forensight {

struct Prediction {
  std::string prediction_id;
  std::string upload_id;
  std::string detector_id;
  Modality modality = Modality::image;
  Label label = Label::real;
  double score = 0.0;
  std::optional<std::vector<FaceRegion>> faces;
  std::int64_t latency_ms = 0;
  Micros created_at = 0;
};

enum class LogOutcome { ok, adapter_error, timeout, invalid_input };

std::string_view to_string(LogOutcome o);

struct ModelLogEntry {
  std::string log_id;
  Micros created_at = 0;
  std::string detector_id;
  Modality modality = Modality::image;
  std::string upload_id;
  std::optional<std::string> prediction_id;
  LogOutcome outcome = LogOutcome::ok;
  std::int64_t duration_ms = 0;
};

struct NativeDetectorSettings {
  FrequencyDetectorConfig frequency;
  AudioDetectorConfig audio;
};

inline constexpr int kMaxPageSize = 100;

/// authenticate -> charge -> fetch upload -> dispatch -> persist -> return,
/// refunding on any failure after the charge. Re-entrant: the credit ledger
/// transaction is the only serialisation point.
class Orchestrator {
 public:
  Orchestrator(Store& store, Accounts& accounts, MediaLibrary& media, const DetectorRegistry& registry,
               const RemoteDetectorClient& remote, Clock clock, NativeDetectorSettings native = {});

  Prediction run_inference(const std::string& user_id, const std::string& upload_id,
                           const std::string& detector_id);
  Prediction get_prediction(const std::string& user_id, const std::string& prediction_id);
  /// Newest first; page is 1-based.
  std::vector<Prediction> list_history(const std::string& user_id, int page, int page_size);

  std::vector<ModelLogEntry> logs_for_upload(const std::string& upload_id);

 private:
  DetectionResult dispatch(const DetectorDescriptor& detector, const MediaUpload& upload);

  Store& store_;
  Accounts& accounts_;
  MediaLibrary& media_;
  const DetectorRegistry& registry_;
  const RemoteDetectorClient& remote_;
  Clock clock_;
  NativeDetectorSettings native_;
};

}  // namespace forensight
