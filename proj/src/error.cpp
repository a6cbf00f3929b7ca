#include "forensight/error.hpp"

namespace forensight {

namespace {

struct ErrorInfo {
  std::string_view name;
  int status;
};

ErrorInfo info(ErrorCode code) {
  switch (code) {
    case ErrorCode::duplicate_email: return {"duplicate_email", 409};
    case ErrorCode::weak_password: return {"weak_password", 422};
    case ErrorCode::mismatched_confirmation: return {"mismatched_confirmation", 422};
    case ErrorCode::invalid_region: return {"invalid_region", 422};
    case ErrorCode::invalid_email: return {"invalid_email", 422};
    case ErrorCode::invalid_field: return {"invalid_field", 422};
    case ErrorCode::invalid_credentials: return {"invalid_credentials", 401};
    case ErrorCode::missing_token: return {"missing_token", 401};
    case ErrorCode::invalid_token: return {"invalid_token", 401};
    case ErrorCode::expired_token: return {"expired_token", 401};
    case ErrorCode::insufficient_credits: return {"insufficient_credits", 402};
    case ErrorCode::unknown_charge: return {"unknown_charge", 404};
    case ErrorCode::double_refund: return {"double_refund", 409};
    case ErrorCode::not_admin: return {"not_admin", 403};
    case ErrorCode::invalid_amount: return {"invalid_amount", 422};
    case ErrorCode::unknown_user: return {"unknown_user", 404};
    case ErrorCode::unsupported_format: return {"unsupported_format", 422};
    case ErrorCode::consent_required: return {"consent_required", 422};
    case ErrorCode::too_large: return {"too_large", 413};
    case ErrorCode::decode_failure: return {"decode_failure", 422};
    case ErrorCode::undecodable_format: return {"undecodable_format", 422};
    case ErrorCode::too_short: return {"too_short", 422};
    case ErrorCode::duplicate_detector: return {"duplicate_detector", 500};
    case ErrorCode::unknown_detector: return {"unknown_detector", 422};
    case ErrorCode::adapter_unreachable: return {"adapter_unreachable", 502};
    case ErrorCode::adapter_timeout: return {"adapter_timeout", 504};
    case ErrorCode::malformed_response: return {"malformed_response", 502};
    case ErrorCode::unknown_model: return {"unknown_model", 422};
    case ErrorCode::modality_mismatch: return {"modality_mismatch", 422};
    case ErrorCode::foreign_upload: return {"foreign_upload", 403};
    case ErrorCode::session_not_found: return {"session_not_found", 404};
    case ErrorCode::attachment_required: return {"attachment_required", 422};
    case ErrorCode::transcription_failed: return {"transcription_failed", 502};
    case ErrorCode::analysis_failed: return {"analysis_failed", 502};
    case ErrorCode::session_conflict: return {"session_conflict", 409};
    case ErrorCode::mllm_not_allowed: return {"mllm_not_allowed", 422};
    case ErrorCode::not_found: return {"not_found", 404};
    case ErrorCode::forbidden: return {"forbidden", 403};
    case ErrorCode::invalid_page: return {"invalid_page", 422};
    case ErrorCode::migration_conflict: return {"migration_conflict", 500};
    case ErrorCode::conflict_retry_exhausted: return {"conflict_retry_exhausted", 503};
    case ErrorCode::store_unreachable: return {"store_unreachable", 503};
    case ErrorCode::persistence_failure: return {"persistence_failure", 500};
    case ErrorCode::invalid_rating: return {"invalid_rating", 422};
    case ErrorCode::unknown_model_reference: return {"unknown_model_reference", 422};
    case ErrorCode::invalid_request: return {"invalid_request", 422};
    case ErrorCode::invalid_config: return {"invalid_config", 500};
    case ErrorCode::bind_failure: return {"bind_failure", 500};
    case ErrorCode::internal: return {"internal", 500};
  }
  return {"internal", 500};
}

constexpr ErrorCode kAllCodes[] = {
    ErrorCode::duplicate_email,
    ErrorCode::weak_password,
    ErrorCode::mismatched_confirmation,
    ErrorCode::invalid_region,
    ErrorCode::invalid_email,
    ErrorCode::invalid_field,
    ErrorCode::invalid_credentials,
    ErrorCode::missing_token,
    ErrorCode::invalid_token,
    ErrorCode::expired_token,
    ErrorCode::insufficient_credits,
    ErrorCode::unknown_charge,
    ErrorCode::double_refund,
    ErrorCode::not_admin,
    ErrorCode::invalid_amount,
    ErrorCode::unknown_user,
    ErrorCode::unsupported_format,
    ErrorCode::consent_required,
    ErrorCode::too_large,
    ErrorCode::decode_failure,
    ErrorCode::undecodable_format,
    ErrorCode::too_short,
    ErrorCode::duplicate_detector,
    ErrorCode::unknown_detector,
    ErrorCode::adapter_unreachable,
    ErrorCode::adapter_timeout,
    ErrorCode::malformed_response,
    ErrorCode::unknown_model,
    ErrorCode::modality_mismatch,
    ErrorCode::foreign_upload,
    ErrorCode::session_not_found,
    ErrorCode::attachment_required,
    ErrorCode::transcription_failed,
    ErrorCode::analysis_failed,
    ErrorCode::session_conflict,
    ErrorCode::mllm_not_allowed,
    ErrorCode::not_found,
    ErrorCode::forbidden,
    ErrorCode::invalid_page,
    ErrorCode::migration_conflict,
    ErrorCode::conflict_retry_exhausted,
    ErrorCode::store_unreachable,
    ErrorCode::persistence_failure,
    ErrorCode::invalid_rating,
    ErrorCode::unknown_model_reference,
    ErrorCode::invalid_request,
    ErrorCode::invalid_config,
    ErrorCode::bind_failure,
    ErrorCode::internal,
};

}  // namespace

std::string_view code_name(ErrorCode code) { return info(code).name; }

int status_of(ErrorCode code) { return info(code).status; }

std::span<const ErrorCode> all_error_codes() { return kAllCodes; }

}  // namespace forensight
