#pragma once

#include <string>

#include <json.hpp>

#include "forensight/accounts.hpp"
#include "forensight/analytics.hpp"
#include "forensight/detectors.hpp"
#include "forensight/media.hpp"
#include "forensight/mllm.hpp"
#include "forensight/orchestrator.hpp"

namespace forensight {

/// "2024-05-01T12:00:00.000000Z"
std::string iso8601(Micros t);

nlohmann::json as_json(const UserAccount& user);  // password hash omitted
nlohmann::json as_json(const CreditEntry& entry);
nlohmann::json as_json(const MediaUpload& upload);
nlohmann::json as_json(const DetectorDescriptor& detector);
nlohmann::json as_json(const FaceRegion& face);
nlohmann::json as_json(const DetectionResult& result);
nlohmann::json as_json(const Prediction& prediction);
nlohmann::json as_json(const Turn& turn);
nlohmann::json as_json(const MllmSession& session);
nlohmann::json as_json(const StatisticsSnapshot& snapshot);
nlohmann::json as_json(const FeedbackSummary& summary);

/// {"error": {"code": ..., "message": ...}}
nlohmann::json error_body(std::string_view code, std::string_view message);

}  // namespace forensight
