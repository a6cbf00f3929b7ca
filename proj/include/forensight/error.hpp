#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forensight {

// Stable machine codes shared by every module. The gateway maps each one to
// exactly one HTTP status (see status_of).
enum class ErrorCode {
  // accounts
  duplicate_email,
  weak_password,
  mismatched_confirmation,
  invalid_region,
  invalid_email,
  invalid_field,
  invalid_credentials,
  missing_token,
  invalid_token,
  expired_token,
  insufficient_credits,
  unknown_charge,
  double_refund,
  not_admin,
  invalid_amount,
  unknown_user,
  // media-ingest
  unsupported_format,
  consent_required,
  too_large,
  decode_failure,
  undecodable_format,
  // detector-registry
  too_short,
  duplicate_detector,
  unknown_detector,
  adapter_unreachable,
  adapter_timeout,
  malformed_response,
  // mllm-workspace
  unknown_model,
  modality_mismatch,
  foreign_upload,
  session_not_found,
  attachment_required,
  transcription_failed,
  analysis_failed,
  session_conflict,
  // orchestrator
  mllm_not_allowed,
  not_found,
  forbidden,
  invalid_page,
  // persistence
  migration_conflict,
  conflict_retry_exhausted,
  store_unreachable,
  persistence_failure,
  // analytics-feedback
  invalid_rating,
  unknown_model_reference,
  // gateway
  invalid_request,
  invalid_config,
  bind_failure,
  internal,
};

std::string_view code_name(ErrorCode code);
int status_of(ErrorCode code);

/// Every declared code, in declaration order.
std::span<const ErrorCode> all_error_codes();

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  explicit Error(ErrorCode code) : Error(code, std::string(code_name(code))) {}

  ErrorCode code() const noexcept { return code_; }
  int status() const noexcept { return status_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace forensight
