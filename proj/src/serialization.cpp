#include "forensight/serialization.hpp"

#include <ctime>
#include <cstdio>

namespace forensight {

using nlohmann::json;

std::string iso8601(Micros t) {
  const std::time_t secs = static_cast<std::time_t>(t >= 0 ? t / kMicrosPerSecond : (t - kMicrosPerSecond + 1) / kMicrosPerSecond);
  const auto micros = static_cast<long>(t - static_cast<Micros>(secs) * kMicrosPerSecond);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06ldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, micros);
  return buf;
}

json as_json(const UserAccount& u) {
  return {{"user_id", u.user_id}, {"name", u.name},     {"email", u.email},
          {"position", u.position}, {"region", u.region}, {"created_at", iso8601(u.created_at)}};
}

json as_json(const CreditEntry& e) {
  json j = {{"entry_id", e.entry_id},
            {"delta", e.delta},
            {"reason", to_string(e.reason)},
            {"timestamp", iso8601(e.timestamp)}};
  j["ref"] = e.ref ? json(*e.ref) : json(nullptr);
  if (e.note) j["note"] = *e.note;
  return j;
}

json as_json(const MediaUpload& u) {
  return {{"upload_id", u.upload_id},       {"user_id", u.user_id},
          {"filename", u.filename},         {"modality", to_string(u.modality)},
          {"format", to_string(u.format)},  {"byte_size", u.byte_size},
          {"content_hash", u.content_hash}, {"storage_ref", u.storage_ref},
          {"consent", u.consent},           {"uploaded_at", iso8601(u.uploaded_at)}};
}

json as_json(const DetectorDescriptor& d) {
  return {{"detector_id", d.detector_id},
          {"display_name", d.display_name},
          {"modality", to_string(d.modality)},
          {"category", to_string(d.category)},
          {"adapter_kind", to_string(d.adapter_kind)},
          {"version", d.version}};
}

json as_json(const FaceRegion& f) { return {{"bbox", {f.x, f.y, f.w, f.h}}, {"score", f.score}}; }

namespace {

json faces_json(const std::optional<std::vector<FaceRegion>>& faces) {
  if (!faces) return nullptr;
  json arr = json::array();
  for (const auto& f : *faces) arr.push_back(as_json(f));
  return arr;
}

}  // namespace

json as_json(const DetectionResult& r) {
  return {{"label", to_string(r.label)},
          {"score", r.score},
          {"faces", faces_json(r.faces)},
          {"latency_ms", r.latency_ms}};
}

json as_json(const Prediction& p) {
  return {{"prediction_id", p.prediction_id}, {"upload_id", p.upload_id},
          {"detector_id", p.detector_id},     {"modality", to_string(p.modality)},
          {"label", to_string(p.label)},      {"score", p.score},
          {"faces", faces_json(p.faces)},     {"latency_ms", p.latency_ms},
          {"created_at", iso8601(p.created_at)}};
}

json as_json(const Turn& t) {
  return {{"role", to_string(t.role)}, {"text", t.text}, {"timestamp", iso8601(t.timestamp)}};
}

json as_json(const MllmSession& s) {
  json turns = json::array();
  for (const auto& t : s.turns) turns.push_back(as_json(t));
  return {{"session_id", s.session_id},
          {"user_id", s.user_id},
          {"model_id", s.model_id},
          {"attachment_id", s.attachment_id ? json(*s.attachment_id) : json(nullptr)},
          {"transcript", s.transcript ? json(*s.transcript) : json(nullptr)},
          {"turns", std::move(turns)},
          {"created_at", iso8601(s.created_at)}};
}

json as_json(const StatisticsSnapshot& s) {
  return {{"total_users", s.total_users},
          {"total_predictions", s.total_predictions},
          {"real_count", s.real_count},
          {"fake_count", s.fake_count},
          {"per_model", s.per_model},
          {"per_modality", s.per_modality},
          {"per_region_users", s.per_region_users},
          {"generated_at", iso8601(s.generated_at)}};
}

json as_json(const FeedbackSummary& s) {
  json histogram = json::object();
  for (const auto& [rating, n] : s.rating_histogram) histogram[std::to_string(rating)] = n;
  return {{"count", s.count},
          {"rating_histogram", std::move(histogram)},
          {"mean_rating", s.mean_rating ? json(*s.mean_rating) : json(nullptr)},
          {"most_accurate_tally", s.most_accurate_tally},
          {"format_tally", s.format_tally}};
}

json error_body(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace forensight
