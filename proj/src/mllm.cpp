#include "forensight/mllm.hpp"

#include <functional>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

bool is_adapter_failure(ErrorCode code) {
  return code == ErrorCode::adapter_unreachable || code == ErrorCode::adapter_timeout ||
         code == ErrorCode::malformed_response;
}

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return std::string(s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1));
}

void replace_all(std::string& text, std::string_view token, std::string_view value) {
  for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
    text.replace(pos, token.size(), value);
  }
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::user ? "user" : "assistant"; }

std::string compose_hybrid_prompt(std::string_view prompt_template, std::string_view transcript,
                                  std::string_view prompt) {
  // Substitute {prompt} first so a transcript containing "{prompt}" stays verbatim.
  std::string out(prompt_template);
  const auto t = out.find("{transcript}");
  if (t == std::string::npos) return out;
  std::string head = out.substr(0, t);
  std::string tail = out.substr(t + 12);
  replace_all(head, "{prompt}", prompt);
  replace_all(tail, "{prompt}", prompt);
  return head + std::string(transcript) + tail;
}

std::vector<ChatMessage> adapter_payload(const std::vector<Turn>& history, const std::string& prompt,
                                         std::size_t cap) {
  std::vector<ChatMessage> messages;
  messages.reserve(history.size() + 1);
  for (const auto& turn : history) messages.push_back({std::string(to_string(turn.role)), turn.text});
  messages.push_back({"user", prompt});
  if (cap > 0 && messages.size() > cap) {
    messages.erase(messages.begin(), messages.end() - static_cast<std::ptrdiff_t>(cap));
  }
  return messages;
}

MllmWorkspace::MllmWorkspace(Store& store, Accounts& accounts, MediaLibrary& media,
                             const DetectorRegistry& registry, MllmConfig config, Clock clock)
    : store_(store),
      accounts_(accounts),
      media_(media),
      registry_(registry),
      config_(std::move(config)),
      clock_(std::move(clock)) {}

std::mutex& MllmWorkspace::session_lock(const std::string& session_id) {
  return session_locks_[std::hash<std::string>{}(session_id) % session_locks_.size()];
}

MllmSession MllmWorkspace::create_session(const std::string& user_id, const std::string& model_id,
                                          const std::optional<std::string>& attachment_id) {
  const auto* model = registry_.find(model_id);
  if (!model || model->category != Category::mllm_aware) {
    throw Error(ErrorCode::unknown_model, "not an available multimodal model: " + model_id);
  }
  if (attachment_id) {
    const auto upload = media_.find(*attachment_id);
    if (!upload) throw Error(ErrorCode::not_found, "upload not found");
    if (upload->user_id != user_id) throw Error(ErrorCode::foreign_upload, "upload belongs to another user");
    if (upload->modality != model->modality) {
      throw Error(ErrorCode::modality_mismatch, model_id + " accepts " +
                                                    std::string(to_string(model->modality)) + " only");
    }
  }
  MllmSession session{crypto::new_id(), user_id, model_id, attachment_id, std::nullopt, {}, clock_()};
  try {
    store_.transactional([&](Connection& c) {
      auto st = c.prepare(
          "INSERT INTO MLLM_SESSIONS (session_id, user_id, model_id, attachment_id, transcript, created_at) "
          "VALUES (?, ?, ?, ?, NULL, ?)");
      st.bind(1, session.session_id).bind(2, user_id).bind(3, model_id).bind(4, attachment_id);
      st.bind(5, session.created_at);
      st.run();
    });
  } catch (const ConstraintError&) {
    throw Error(ErrorCode::unknown_user, "unknown user");
  }
  return session;
}

MllmSession MllmWorkspace::load_owned(const std::string& user_id, const std::string& session_id) {
  auto session = store_.read([&](Connection& c) -> std::optional<MllmSession> {
    auto st = c.prepare(
        "SELECT session_id, user_id, model_id, attachment_id, transcript, created_at FROM MLLM_SESSIONS "
        "WHERE session_id = ?");
    st.bind(1, session_id);
    if (!st.step()) return std::nullopt;
    MllmSession s{st.column_text(0), st.column_text(1), st.column_text(2),
                  st.column_optional_text(3), st.column_optional_text(4), {}, st.column_int(5)};
    auto turns = c.prepare("SELECT role, text, created_at FROM MLLM_TURNS WHERE session_id = ? ORDER BY seq");
    turns.bind(1, session_id);
    while (turns.step()) {
      s.turns.push_back({turns.column_text(0) == "user" ? Role::user : Role::assistant,
                         turns.column_text(1), turns.column_int(2)});
    }
    return s;
  });
  if (!session || session->user_id != user_id) {
    throw Error(ErrorCode::session_not_found, "session not found");
  }
  return *session;
}

MllmSession MllmWorkspace::get_session(const std::string& user_id, const std::string& session_id) {
  return load_owned(user_id, session_id);
}

Turn MllmWorkspace::send_message(const std::string& user_id, const std::string& session_id,
                                 const std::string& prompt) {
  if (trimmed(prompt).empty()) throw Error(ErrorCode::invalid_field, "prompt must not be empty");
  std::lock_guard lock(session_lock(session_id));
  const auto session = load_owned(user_id, session_id);
  if (session.model_id == config_.hybrid_model_id) return send_hybrid(session, prompt);
  return send_chat(session, prompt);
}

Turn MllmWorkspace::analyze_audio_hybrid(const std::string& user_id, const std::string& session_id,
                                         const std::string& prompt) {
  if (trimmed(prompt).empty()) throw Error(ErrorCode::invalid_field, "prompt must not be empty");
  std::lock_guard lock(session_lock(session_id));
  const auto session = load_owned(user_id, session_id);
  if (session.model_id != config_.hybrid_model_id) {
    throw Error(ErrorCode::unknown_model, "session model is not the transcription pipeline");
  }
  return send_hybrid(session, prompt);
}

Turn MllmWorkspace::send_chat(const MllmSession& session, const std::string& prompt) {
  std::optional<ChatAttachment> attachment;
  if (session.attachment_id) {
    const auto upload = media_.find(*session.attachment_id);
    if (!upload) throw Error(ErrorCode::not_found, "attachment no longer exists");
    attachment = ChatAttachment{upload->modality, upload->format, media_.load_bytes(*upload)};
  }

  const auto charge = accounts_.charge_credit(session.user_id, session.session_id);
  try {
    const ChatClient client(config_.chat_url, config_.timeout);
    const std::string reply = client.chat(
        session.model_id, adapter_payload(session.turns, prompt, config_.history_cap),
        attachment ? &*attachment : nullptr);
    if (trimmed(reply).empty()) throw Error(ErrorCode::malformed_response, "adapter returned empty text");
    return commit_exchange(session, prompt, reply, std::nullopt);
  } catch (...) {
    accounts_.refund_credit(session.user_id, charge.entry_id);
    throw;
  }
}

Turn MllmWorkspace::send_hybrid(const MllmSession& session, const std::string& prompt) {
  if (!session.attachment_id) {
    throw Error(ErrorCode::attachment_required, "the transcription pipeline needs an audio attachment");
  }
  const auto upload = media_.find(*session.attachment_id);
  if (!upload) throw Error(ErrorCode::not_found, "attachment no longer exists");
  if (upload->modality != Modality::audio) {
    throw Error(ErrorCode::modality_mismatch, "the transcription pipeline accepts audio only");
  }
  const auto bytes = media_.load_bytes(*upload);

  // One credit covers both stages.
  const auto charge = accounts_.charge_credit(session.user_id, session.session_id);
  try {
    std::string transcript;
    try {
      transcript = TranscriptionClient(config_.transcribe_url, config_.timeout).transcribe(upload->format, bytes);
    } catch (const Error& e) {
      if (!is_adapter_failure(e.code())) throw;
      throw Error(ErrorCode::transcription_failed, std::string("transcription failed: ") + e.what());
    }
    if (trimmed(transcript).empty()) transcript = config_.empty_transcript_marker;

    const std::string composed = compose_hybrid_prompt(config_.prompt_template, transcript, prompt);
    std::string reply;
    try {
      reply = ChatClient(config_.chat_url, config_.timeout)
                  .chat(config_.analysis_model_id,
                        adapter_payload(session.turns, composed, config_.history_cap), nullptr);
    } catch (const Error& e) {
      if (!is_adapter_failure(e.code())) throw;
      throw Error(ErrorCode::analysis_failed, std::string("analysis failed: ") + e.what());
    }
    if (trimmed(reply).empty()) throw Error(ErrorCode::analysis_failed, "analysis returned empty text");
    return commit_exchange(session, prompt, reply, transcript);
  } catch (...) {
    accounts_.refund_credit(session.user_id, charge.entry_id);
    throw;
  }
}

Turn MllmWorkspace::commit_exchange(const MllmSession& session, const std::string& prompt,
                                    const std::string& reply,
                                    const std::optional<std::string>& transcript) {
  const Micros now = clock_();
  const auto seq = static_cast<std::int64_t>(session.turns.size());
  try {
    store_.transactional([&](Connection& c) {
      auto count = c.prepare("SELECT COUNT(*) FROM MLLM_TURNS WHERE session_id = ?");
      count.bind(1, session.session_id);
      count.step();
      if (count.column_int(0) != seq) {
        throw Error(ErrorCode::session_conflict, "session advanced concurrently; resend the message");
      }
      auto insert = [&](std::int64_t n, Role role, const std::string& text) {
        auto st = c.prepare("INSERT INTO MLLM_TURNS (session_id, seq, role, text, created_at) VALUES (?, ?, ?, ?, ?)");
        st.bind(1, session.session_id).bind(2, n).bind(3, to_string(role)).bind(4, text).bind(5, now);
        st.run();
      };
      insert(seq, Role::user, prompt);
      insert(seq + 1, Role::assistant, reply);
      if (transcript) {
        auto st = c.prepare("UPDATE MLLM_SESSIONS SET transcript = ? WHERE session_id = ?");
        st.bind(1, *transcript).bind(2, session.session_id);
        st.run();
      }
    });
  } catch (const ConstraintError&) {
    throw Error(ErrorCode::session_conflict, "session advanced concurrently; resend the message");
  }
  return Turn{Role::assistant, reply, now};
}

}  // namespace forensight
