#pragma once

#include <array>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forensight/accounts.hpp"
#include "forensight/adapters.hpp"
#include "forensight/detectors.hpp"
#include "forensight/media.hpp"

namespace forensight {

enum class Role { user, assistant };

std::string_view to_string(Role r);

// Assistant output is free text. The type has no label or score member, so
// nothing produced by this module can carry an authenticity verdict.
struct Turn {
  Role role = Role::user;
  std::string text;
  Micros timestamp = 0;
};

struct MllmSession {
  std::string session_id;
  std::string user_id;
  std::string model_id;
  std::optional<std::string> attachment_id;
  std::optional<std::string> transcript;  // latest hybrid-pipeline transcript
  std::vector<Turn> turns;
  Micros created_at = 0;
};

inline constexpr std::string_view kHybridPromptTemplate =
    "Transcript: {transcript}\nUser question: {prompt}\n"
    "Describe the speaker characteristics, tone, and semantic consistency of this audio.";

struct MllmConfig {
  std::string chat_url;
  std::string transcribe_url;
  AdapterTimeout timeout = kDefaultAdapterTimeout;
  std::string hybrid_model_id = "whisper+qwen2-vl-2b";
  std::string analysis_model_id = "qwen2-vl-2b";
  std::string prompt_template = std::string(kHybridPromptTemplate);
  std::string prompt_template_version = "1";
  std::string empty_transcript_marker = "[no speech detected]";
  std::size_t history_cap = 20;
};

/// Substitutes {transcript} and {prompt} in the template.
std::string compose_hybrid_prompt(std::string_view prompt_template, std::string_view transcript,
                                  std::string_view prompt);

/// The last `cap` messages of history followed by the new user prompt.
std::vector<ChatMessage> adapter_payload(const std::vector<Turn>& history, const std::string& prompt,
                                         std::size_t cap);

/// Conversational analysis against remote multimodal models. Each message
/// costs one credit, refunded if the adapter fails.
class MllmWorkspace {
 public:
  MllmWorkspace(Store& store, Accounts& accounts, MediaLibrary& media,
                const DetectorRegistry& registry, MllmConfig config, Clock clock);

  MllmSession create_session(const std::string& user_id, const std::string& model_id,
                             const std::optional<std::string>& attachment_id);
  /// Routes to analyze_audio_hybrid for the transcription pipeline model.
  Turn send_message(const std::string& user_id, const std::string& session_id,
                    const std::string& prompt);
  Turn analyze_audio_hybrid(const std::string& user_id, const std::string& session_id,
                            const std::string& prompt);
  MllmSession get_session(const std::string& user_id, const std::string& session_id);

  const MllmConfig& config() const { return config_; }

 private:
  std::mutex& session_lock(const std::string& session_id);
  MllmSession load_owned(const std::string& user_id, const std::string& session_id);
  Turn send_chat(const MllmSession& session, const std::string& prompt);
  Turn send_hybrid(const MllmSession& session, const std::string& prompt);
  Turn commit_exchange(const MllmSession& session, const std::string& prompt,
                       const std::string& reply, const std::optional<std::string>& transcript);

  Store& store_;
  Accounts& accounts_;
  MediaLibrary& media_;
  const DetectorRegistry& registry_;
  MllmConfig config_;
  Clock clock_;
  std::array<std::mutex, 64> session_locks_;
};

}  // namespace forensight
