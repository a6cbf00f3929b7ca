#include "forensight/orchestrator.hpp"

#include <chrono>

#include <json.hpp>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

using nlohmann::json;

std::string faces_to_text(const std::optional<std::vector<FaceRegion>>& faces) {
  if (!faces) return {};
  json arr = json::array();
  for (const auto& f : *faces) arr.push_back({{"bbox", {f.x, f.y, f.w, f.h}}, {"score", f.score}});
  return arr.dump();
}

std::optional<std::vector<FaceRegion>> faces_from_text(const std::optional<std::string>& text) {
  if (!text) return std::nullopt;
  std::vector<FaceRegion> faces;
  for (const auto& f : json::parse(*text)) {
    faces.push_back({f["bbox"][0].get<int>(), f["bbox"][1].get<int>(), f["bbox"][2].get<int>(),
                     f["bbox"][3].get<int>(), f["score"].get<double>()});
  }
  return faces;
}

constexpr std::string_view kPredictionColumns =
    "p.prediction_id, p.upload_id, p.detector_id, p.modality, p.label, p.score, p.faces, p.latency_ms, "
    "p.created_at";

Prediction read_prediction(const Statement& st) {
  return Prediction{st.column_text(0),
                    st.column_text(1),
                    st.column_text(2),
                    parse_modality(st.column_text(3)).value_or(Modality::image),
                    parse_label(st.column_text(4)).value_or(Label::real),
                    st.column_double(5),
                    faces_from_text(st.column_optional_text(6)),
                    st.column_int(7),
                    st.column_int(8)};
}

void insert_log(Connection& c, const ModelLogEntry& log) {
  auto st = c.prepare(
      "INSERT INTO MODEL_LOGS (log_id, upload_id, prediction_id, detector_id, modality, outcome, "
      "duration_ms, created_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
  st.bind(1, log.log_id).bind(2, log.upload_id).bind(3, log.prediction_id).bind(4, log.detector_id);
  st.bind(5, to_string(log.modality)).bind(6, to_string(log.outcome)).bind(7, log.duration_ms);
  st.bind(8, log.created_at);
  st.run();
}

LogOutcome outcome_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::adapter_timeout: return LogOutcome::timeout;
    case ErrorCode::decode_failure:
    case ErrorCode::undecodable_format:
    case ErrorCode::too_short: return LogOutcome::invalid_input;
    default: return LogOutcome::adapter_error;
  }
}

}  // namespace

std::string_view to_string(LogOutcome o) {
  switch (o) {
    case LogOutcome::ok: return "ok";
    case LogOutcome::adapter_error: return "adapter_error";
    case LogOutcome::timeout: return "timeout";
    case LogOutcome::invalid_input: return "invalid_input";
  }
  return "ok";
}

Orchestrator::Orchestrator(Store& store, Accounts& accounts, MediaLibrary& media,
                           const DetectorRegistry& registry, const RemoteDetectorClient& remote,
                           Clock clock, NativeDetectorSettings native)
    : store_(store),
      accounts_(accounts),
      media_(media),
      registry_(registry),
      remote_(remote),
      clock_(std::move(clock)),
      native_(native) {}

DetectionResult Orchestrator::dispatch(const DetectorDescriptor& detector, const MediaUpload& upload) {
  const auto bytes = media_.load_bytes(upload);
  if (detector.adapter_kind == AdapterKind::native_heuristic) {
    if (upload.modality == Modality::image) {
      return run_native_frequency_detector(decode_image(bytes, upload.format), native_.frequency);
    }
    return run_native_audio_detector(decode_audio(bytes, upload.format), native_.audio);
  }
  std::optional<std::pair<int, int>> size;
  if (upload.modality == Modality::image) size = probe_image_size(bytes, upload.format);
  return remote_.infer(detector, bytes, upload.format, size);
}

Prediction Orchestrator::run_inference(const std::string& user_id, const std::string& upload_id,
                                       const std::string& detector_id) {
  const auto* detector = registry_.find(detector_id);
  if (!detector) throw Error(ErrorCode::unknown_detector, "unknown detector: " + detector_id);
  if (detector->adapter_kind == AdapterKind::mllm_chat) {
    throw Error(ErrorCode::mllm_not_allowed, "multimodal chat models run through the MLLM workspace");
  }
  const auto upload = media_.find(upload_id);
  if (!upload) throw Error(ErrorCode::not_found, "upload not found");
  if (upload->user_id != user_id) throw Error(ErrorCode::forbidden, "upload belongs to another user");
  if (upload->modality != detector->modality) {
    throw Error(ErrorCode::modality_mismatch, detector_id + " accepts " +
                                                  std::string(to_string(detector->modality)) + " only");
  }

  const std::string prediction_id = crypto::new_id();
  const auto charge = accounts_.charge_credit(user_id, prediction_id);
  const auto started = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
        .count();
  };
  ModelLogEntry log{crypto::new_id(), 0, detector_id, upload->modality, upload_id, std::nullopt,
                    LogOutcome::ok, 0};

  const auto fail = [&](LogOutcome outcome) {
    log.outcome = outcome;
    log.duration_ms = elapsed();
    log.created_at = clock_();
    try {
      store_.transactional([&](Connection& c) {
        insert_log(c, log);
        Accounts::refund_in(c, user_id, charge.entry_id, log.created_at);
      });
    } catch (...) {
      // The refund must land even if the log cannot.
      accounts_.refund_credit(user_id, charge.entry_id);
    }
  };

  DetectionResult result;
  try {
    result = dispatch(*detector, *upload);
  } catch (const Error& e) {
    fail(outcome_for(e.code()));
    throw;
  } catch (...) {
    fail(LogOutcome::adapter_error);
    throw;
  }

  Prediction prediction{prediction_id, upload_id,       detector_id,       upload->modality,
                        result.label,  result.score,    result.faces,      result.latency_ms,
                        clock_()};
  log.prediction_id = prediction_id;
  log.duration_ms = elapsed();
  log.created_at = prediction.created_at;
  try {
    store_.transactional([&](Connection& c) {
      auto st = c.prepare(
          "INSERT INTO PREDICTIONS (prediction_id, upload_id, detector_id, modality, label, score, faces, "
          "latency_ms, created_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)");
      st.bind(1, prediction.prediction_id).bind(2, upload_id).bind(3, detector_id);
      st.bind(4, to_string(prediction.modality)).bind(5, to_string(prediction.label));
      st.bind(6, prediction.score);
      if (prediction.faces) st.bind(7, faces_to_text(prediction.faces)); else st.bind_null(7);
      st.bind(8, prediction.latency_ms).bind(9, prediction.created_at);
      st.run();
      insert_log(c, log);
    });
  } catch (const std::exception& e) {
    // No outcome value describes a storage failure; it is audited as an
    // adapter_error attempt without a prediction.
    log.prediction_id.reset();
    log.log_id = crypto::new_id();
    fail(LogOutcome::adapter_error);
    throw Error(ErrorCode::persistence_failure, std::string("could not persist prediction: ") + e.what());
  }
  return prediction;
}

Prediction Orchestrator::get_prediction(const std::string& user_id, const std::string& prediction_id) {
  return store_.read([&](Connection& c) {
    auto st = c.prepare("SELECT " + std::string(kPredictionColumns) +
                        ", u.user_id FROM PREDICTIONS p JOIN UPLOADS u ON u.upload_id = p.upload_id "
                        "WHERE p.prediction_id = ?");
    st.bind(1, prediction_id);
    if (!st.step()) throw Error(ErrorCode::not_found, "prediction not found");
    if (st.column_text(9) != user_id) throw Error(ErrorCode::forbidden, "prediction belongs to another user");
    return read_prediction(st);
  });
}

std::vector<Prediction> Orchestrator::list_history(const std::string& user_id, int page, int page_size) {
  if (page < 1 || page_size < 1 || page_size > kMaxPageSize) {
    throw Error(ErrorCode::invalid_page, "page must be >= 1 and page_size within 1..100");
  }
  return store_.read([&](Connection& c) {
    auto st = c.prepare("SELECT " + std::string(kPredictionColumns) +
                        " FROM PREDICTIONS p JOIN UPLOADS u ON u.upload_id = p.upload_id "
                        "WHERE u.user_id = ? ORDER BY p.created_at DESC, p.rowid DESC LIMIT ? OFFSET ?");
    st.bind(1, user_id).bind(2, page_size).bind(3, static_cast<std::int64_t>(page - 1) * page_size);
    std::vector<Prediction> out;
    while (st.step()) out.push_back(read_prediction(st));
    return out;
  });
}

std::vector<ModelLogEntry> Orchestrator::logs_for_upload(const std::string& upload_id) {
  return store_.read([&](Connection& c) {
    auto st = c.prepare(
        "SELECT log_id, created_at, detector_id, modality, upload_id, prediction_id, outcome, duration_ms "
        "FROM MODEL_LOGS WHERE upload_id = ? ORDER BY created_at, rowid");
    st.bind(1, upload_id);
    std::vector<ModelLogEntry> out;
    while (st.step()) {
      const auto outcome = st.column_text(6);
      LogOutcome o = LogOutcome::ok;
      if (outcome == "adapter_error") o = LogOutcome::adapter_error;
      if (outcome == "timeout") o = LogOutcome::timeout;
      if (outcome == "invalid_input") o = LogOutcome::invalid_input;
      out.push_back({st.column_text(0), st.column_int(1), st.column_text(2),
                     parse_modality(st.column_text(3)).value_or(Modality::image), st.column_text(4),
                     st.column_optional_text(5), o, st.column_int(7)});
    }
    return out;
  });
}

}  // namespace forensight
