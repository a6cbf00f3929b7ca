#include "contract.hpp"

#include <httplib.h>

#include <atomic>
#include <functional>
#include <map>
#include <thread>

#include "forensight/crypto.hpp"
#include "forensight/gateway.hpp"
#include "forensight/platform.hpp"
#include "forensight/token.hpp"
#include "support.hpp"

namespace testing {

using forensight::ErrorCode;
using nlohmann::json;

bool ContractReport::all_passed() const { return failures() == 0 && !checks.empty(); }

std::size_t ContractReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.passed ? 0 : 1;
  return n;
}

namespace {

constexpr std::int64_t kImageLimit = 64 * 1024;
constexpr std::int64_t kAudioLimit = 256 * 1024;

std::string envelope_problem(const httplib::Result& res, ErrorCode expected) {
  if (!res) return "no response (" + httplib::to_string(res.error()) + ")";
  const int want = forensight::status_of(expected);
  if (res->status != want) {
    return "status " + std::to_string(res->status) + ", want " + std::to_string(want) + ": " + res->body;
  }
  if (res->get_header_value("Content-Type").rfind("application/json", 0) != 0) return "content type is not JSON";
  const auto body = json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || body.size() != 1 || !body.contains("error")) {
    return "body is not an error envelope: " + res->body;
  }
  const auto& err = body["error"];
  if (!err.is_object() || err.size() != 2 || !err.contains("code") || !err.contains("message") ||
      !err["code"].is_string() || !err["message"].is_string()) {
    return "malformed error object: " + res->body;
  }
  if (err["code"] != forensight::code_name(expected)) return "code " + err["code"].get<std::string>();
  if (err["message"].get<std::string>().empty()) return "empty message";
  return {};
}

class Sweep {
 public:
  Sweep() {
    infer_.on("/v1/infer", [](const json& body, httplib::Response& res) {
      const auto id = body.value("detector_id", "");
      if (id == "audio-cnn") std::this_thread::sleep_for(std::chrono::milliseconds(1200));
      if (id == "pg-fdd") return reply_json(res, {{"label", "maybe"}});
      reply_json(res, {{"label", "fake"}, {"score", 0.8}, {"latency_ms", 3}});
    });
    mllm_.on("/v1/chat", [this](const json& body, httplib::Response& res) {
      const auto text = body["messages"].back()["text"].get<std::string>();
      if (text.find("slow") != std::string::npos) std::this_thread::sleep_for(std::chrono::milliseconds(1200));
      if (text.find("garbage") != std::string::npos) return reply_json(res, {{"nope", true}});
      if (text.find("broken") != std::string::npos) return reply_json(res, {}, 500);
      if (text.find("race") != std::string::npos) {
        // Another worker commits an exchange while this one waits on the model.
        platform_->store().transactional([&](forensight::Connection& c) {
          for (int seq = 0; seq < 2; ++seq) {
            auto st = c.prepare(
                "INSERT INTO MLLM_TURNS (session_id, seq, role, text, created_at) VALUES (?, ?, ?, 'x', 0)");
            st.bind(1, race_session_).bind(2, static_cast<std::int64_t>(seq));
            st.bind(3, std::string(seq == 0 ? "user" : "assistant"));
            st.run();
          }
        });
      }
      reply_json(res, {{"text", "The image shows soft, even lighting."}});
    });
    mllm_.on("/v1/transcribe", [this](const json&, httplib::Response& res) {
      if (fail_transcription_) return reply_json(res, {}, 502);
      reply_json(res, {{"transcript", "hello world"}});
    });

    auto config = test_config(dir_);
    for (const auto* id : {"xception", "pg-fdd", "audio-cnn"}) config.adapter_urls[id] = infer_.url();
    config.chat_url = mllm_.url();
    config.transcribe_url = mllm_.url();
    config.adapter_timeout = std::chrono::milliseconds(500);
    config.limits = {kImageLimit, kAudioLimit};
    config.worker_threads = 8;
    platform_ = std::make_unique<forensight::Platform>(config);
    gateway_ = std::make_unique<forensight::Gateway>(*platform_);
    port_ = gateway_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { gateway_->listen(); });
    while (!gateway_->running()) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    seed();
  }

  ~Sweep() {
    gateway_->stop();
    thread_.join();
  }

  ContractReport run();

 private:
  using Scenario = std::function<httplib::Result()>;

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(std::chrono::seconds(20));
    return c;
  }

  httplib::Headers auth(const std::string& token) const {
    if (token.empty()) return {};
    return {{"Authorization", "Bearer " + token}};
  }

  httplib::Result get(const std::string& path, const std::string& token) const {
    return client().Get(path, auth(token));
  }

  httplib::Result post(const std::string& path, const std::string& token, const json& body) const {
    return post_raw(path, token, body.dump());
  }

  httplib::Result post_raw(const std::string& path, const std::string& token, const std::string& body) const {
    return client().Post(path, auth(token), body, "application/json");
  }

  httplib::Result upload(const std::string& token, const Bytes& bytes, const std::string& name,
                         const std::string& consent) const {
    httplib::MultipartFormDataItems items = {
        {"file", std::string(bytes.begin(), bytes.end()), name, "application/octet-stream"},
        {"consent", consent, "", ""}};
    return client().Post("/api/uploads", auth(token), items);
  }

  std::string ingest(const TestUser& who, const Bytes& bytes, const std::string& name) {
    return platform_->media().ingest(who.user_id, name, bytes, true).upload_id;
  }

  std::string session(const TestUser& who, const std::string& model, std::optional<std::string> attachment) {
    return platform_->mllm().create_session(who.user_id, model, attachment).session_id;
  }

  void seed();
  std::map<std::string, Scenario> scenarios();

  TempDir dir_;
  StubServer infer_;
  StubServer mllm_;
  std::unique_ptr<forensight::Platform> platform_;
  std::unique_ptr<forensight::Gateway> gateway_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<bool> fail_transcription_{false};
  std::string race_session_;

  TestUser user_, other_, broke_, admin_;
  std::string image_, audio_, short_audio_, truncated_, avif_, broke_image_, other_image_;
  std::string chat_session_, hybrid_session_, bare_hybrid_, broke_session_;
  std::string prediction_;
  std::string expired_;
};

void Sweep::seed() {
  auto& p = *platform_;
  user_ = make_user(p, "user@example.org", "US");
  other_ = make_user(p, "other@example.org", "DE");
  broke_ = make_user(p, "broke@example.org", "FR");
  admin_ = make_user(p, "admin@example.org", "GB");
  image_ = ingest(user_, checkerboard_png(8), "board.png");
  audio_ = ingest(user_, sine_wav(440, 16000, 4096), "tone.wav");
  short_audio_ = ingest(user_, sine_wav(440, 16000, 300), "blip.wav");
  auto png = constant_png(24, 10);
  png.resize(png.size() / 2);
  truncated_ = ingest(user_, png, "cut.png");
  avif_ = ingest(user_, fake_avif(), "photo.avif");
  other_image_ = ingest(other_, constant_png(8, 200), "theirs.png");
  broke_image_ = ingest(broke_, constant_png(8, 50), "mine.png");
  chat_session_ = session(user_, "qwen-vl-chat", image_);
  hybrid_session_ = session(user_, "whisper+qwen2-vl-2b", audio_);
  bare_hybrid_ = session(user_, "whisper+qwen2-vl-2b", std::nullopt);
  broke_session_ = session(broke_, "qwen-vl-chat", std::nullopt);
  race_session_ = session(user_, "llava-next-13b", std::nullopt);
  for (int i = 0; i < 20; ++i) p.accounts().charge_credit(broke_.user_id);
  prediction_ = p.orchestrator().run_inference(user_.user_id, image_, "freq-heuristic-v1").prediction_id;
  const auto now = p.accounts().now() / 1000000;
  expired_ = forensight::sign_token({user_.user_id, now - 7200, now - 3600}, p.config().token_key);
}

std::map<std::string, Sweep::Scenario> Sweep::scenarios() {
  std::map<std::string, Scenario> s;
  const auto& tok = user_.token;
  auto reg = [](const std::string& email) {
    return json{{"name", "Ada"},        {"email", email},          {"position", "analyst"},
                {"region", "US"},       {"password", "passw0rd!"}, {"password_confirm", "passw0rd!"}};
  };

  s["register:success"] = [=, this] { return post("/api/register", "", reg("new@example.org")); };
  s["register:invalid_request"] = [=, this] { return post_raw("/api/register", "", "{not json"); };
  s["register:invalid_field"] = [=, this] {
    auto b = reg("a1@example.org");
    b["name"] = "";
    return post("/api/register", "", b);
  };
  s["register:invalid_email"] = [=, this] { return post("/api/register", "", reg("not-an-email")); };
  s["register:invalid_region"] = [=, this] {
    auto b = reg("a2@example.org");
    b["region"] = "XX";
    return post("/api/register", "", b);
  };
  s["register:mismatched_confirmation"] = [=, this] {
    auto b = reg("a3@example.org");
    b["password_confirm"] = "passw0rd?";
    return post("/api/register", "", b);
  };
  s["register:weak_password"] = [=, this] {
    auto b = reg("a4@example.org");
    b["password"] = b["password_confirm"] = "short";
    return post("/api/register", "", b);
  };
  s["register:duplicate_email"] = [=, this] { return post("/api/register", "", reg("USER@example.org")); };

  s["login:success"] = [=, this] {
    return post("/api/login", "", {{"email", "user@example.org"}, {"password", "passw0rd!"}});
  };
  s["login:invalid_request"] = [=, this] { return post("/api/login", "", json::object()); };
  s["login:invalid_credentials"] = [=, this] {
    return post("/api/login", "", {{"email", "user@example.org"}, {"password", "wrong-pass1"}});
  };

  s["getCredits:success"] = [=, this] { return get("/api/credits", tok); };

  s["grantCredits:success"] = [=, this] {
    return post("/api/admin/credits", admin_.token, {{"user_id", other_.user_id}, {"amount", 5}});
  };
  s["grantCredits:invalid_request"] = [=, this] { return post("/api/admin/credits", admin_.token, json::object()); };
  s["grantCredits:not_admin"] = [=, this] {
    return post("/api/admin/credits", tok, {{"user_id", other_.user_id}, {"amount", 5}});
  };
  s["grantCredits:unknown_user"] = [=, this] {
    return post("/api/admin/credits", admin_.token, {{"user_id", "nobody"}, {"amount", 5}});
  };
  s["grantCredits:invalid_amount"] = [=, this] {
    return post("/api/admin/credits", admin_.token, {{"user_id", other_.user_id}, {"amount", 0}});
  };

  s["createUpload:success"] = [=, this] { return upload(tok, constant_png(12, 77), "fresh.png", "true"); };
  s["createUpload:invalid_request"] = [=, this] { return post("/api/uploads", tok, {{"file", "x"}}); };
  s["createUpload:consent_required"] = [=, this] { return upload(tok, constant_png(12, 78), "c.png", "false"); };
  s["createUpload:unsupported_format"] = [=, this] {
    const std::string text = "just some text";
    return upload(tok, Bytes(text.begin(), text.end()), "notes.png", "true");
  };
  s["createUpload:too_large"] = [=, this] {
    auto big = constant_png(8, 1);
    big.resize(kImageLimit + 1, 0);
    return upload(tok, big, "big.png", "true");
  };
  s["createUpload:too_large:transport"] = [=, this] {
    Bytes huge(static_cast<std::size_t>(kAudioLimit + 128 * 1024), 0x42);
    return upload(tok, huge, "huge.wav", "true");
  };

  s["listDetectors:success"] = [=, this] { return get("/api/detectors?modality=audio", ""); };
  s["listDetectors:invalid_request"] = [=, this] { return get("/api/detectors?modality=video", ""); };

  auto infer = [=, this](const std::string& token, const std::string& upload_id, const std::string& detector) {
    return post("/api/inferences", token, {{"upload_id", upload_id}, {"detector_id", detector}});
  };
  s["runInference:success"] = [=] { return infer(tok, image_, "xception"); };
  s["runInference:invalid_request"] = [=, this] { return post("/api/inferences", tok, {{"upload_id", 7}}); };
  s["runInference:unknown_detector"] = [=] { return infer(tok, image_, "deep-oracle"); };
  s["runInference:mllm_not_allowed"] = [=] { return infer(tok, image_, "qwen-vl-chat"); };
  s["runInference:not_found"] = [=] { return infer(tok, "missing", "xception"); };
  s["runInference:forbidden"] = [=] { return infer(tok, other_image_, "xception"); };
  s["runInference:modality_mismatch"] = [=] { return infer(tok, audio_, "xception"); };
  s["runInference:insufficient_credits"] = [=, this] { return infer(broke_.token, broke_image_, "xception"); };
  s["runInference:too_short"] = [=] { return infer(tok, short_audio_, "audio-flatness-v1"); };
  s["runInference:decode_failure"] = [=] { return infer(tok, truncated_, "freq-heuristic-v1"); };
  s["runInference:undecodable_format"] = [=] { return infer(tok, avif_, "freq-heuristic-v1"); };
  s["runInference:adapter_unreachable"] = [=] { return infer(tok, image_, "ucf"); };
  s["runInference:adapter_timeout"] = [=] { return infer(tok, audio_, "audio-cnn"); };
  s["runInference:malformed_response"] = [=] { return infer(tok, image_, "pg-fdd"); };

  s["getPrediction:success"] = [=, this] { return get("/api/inferences/" + prediction_, tok); };
  s["getPrediction:not_found"] = [=, this] { return get("/api/inferences/no-such-id", tok); };
  s["getPrediction:forbidden"] = [=, this] { return get("/api/inferences/" + prediction_, other_.token); };

  s["listHistory:success"] = [=, this] { return get("/api/inferences?page=1&page_size=5", tok); };
  s["listHistory:invalid_page"] = [=, this] { return get("/api/inferences?page=0", tok); };

  auto open = [=, this](const std::string& token, const json& body) { return post("/api/mllm/sessions", token, body); };
  s["createSession:success"] = [=] { return open(tok, {{"model_id", "internvl-chat-v1.5"}, {"attachment_id", image_}}); };
  s["createSession:invalid_request"] = [=] { return open(tok, {{"attachment_id", image_}}); };
  s["createSession:unknown_model"] = [=] { return open(tok, {{"model_id", "xception"}}); };
  s["createSession:not_found"] = [=] { return open(tok, {{"model_id", "qwen-vl-chat"}, {"attachment_id", "gone"}}); };
  s["createSession:foreign_upload"] = [=] {
    return open(tok, {{"model_id", "qwen-vl-chat"}, {"attachment_id", other_image_}});
  };
  s["createSession:modality_mismatch"] = [=] { return open(tok, {{"model_id", "qwen-vl-chat"}, {"attachment_id", audio_}}); };

  auto say = [=, this](const std::string& token, const std::string& session_id, const std::string& prompt) {
    return post("/api/mllm/sessions/" + session_id + "/messages", token, {{"prompt", prompt}});
  };
  s["sendMessage:success"] = [=] { return say(tok, chat_session_, "Is this image real?"); };
  s["sendMessage:invalid_request"] = [=, this] {
    return post_raw("/api/mllm/sessions/" + chat_session_ + "/messages", tok, "");
  };
  s["sendMessage:invalid_field"] = [=] { return say(tok, chat_session_, "   "); };
  s["sendMessage:session_not_found"] = [=] { return say(other_.token, chat_session_, "hello"); };
  s["sendMessage:insufficient_credits"] = [=, this] { return say(broke_.token, broke_session_, "hello"); };
  s["sendMessage:attachment_required"] = [=] { return say(tok, bare_hybrid_, "hello"); };
  s["sendMessage:adapter_unreachable"] = [=, this] {
    mllm_.pause();
    auto res = say(tok, chat_session_, "anyone there?");
    mllm_.resume();
    return res;
  };
  s["sendMessage:adapter_timeout"] = [=] { return say(tok, chat_session_, "slow answer please"); };
  s["sendMessage:malformed_response"] = [=] { return say(tok, chat_session_, "garbage reply please"); };
  s["sendMessage:transcription_failed"] = [=, this] {
    fail_transcription_ = true;
    auto res = say(tok, hybrid_session_, "what is said?");
    fail_transcription_ = false;
    return res;
  };
  s["sendMessage:analysis_failed"] = [=] { return say(tok, hybrid_session_, "broken analysis"); };
  s["sendMessage:session_conflict"] = [=, this] { return say(tok, race_session_, "race"); };

  s["getStatistics:success"] = [=, this] { return get("/api/statistics", tok); };

  auto feedback = [](int rating) {
    return json{{"models_used", {"xception"}}, {"formats_used", {"image"}}, {"most_accurate_model", "xception"},
                {"useful_features", "gauge"},  {"improvements", "none"},    {"rating", rating},
                {"user_role", "student"},      {"prior_exposure", false}};
  };
  s["submitFeedback:success"] = [=, this] { return post("/api/feedback", tok, feedback(4)); };
  s["submitFeedback:invalid_request"] = [=, this] { return post("/api/feedback", tok, {{"rating", "five"}}); };
  s["submitFeedback:invalid_rating"] = [=, this] { return post("/api/feedback", tok, feedback(6)); };
  s["submitFeedback:unknown_model_reference"] = [=, this] {
    auto b = feedback(3);
    b["most_accurate_model"] = "gpt-9";
    return post("/api/feedback", tok, b);
  };
  s["submitFeedback:invalid_field"] = [=, this] {
    auto b = feedback(3);
    b["formats_used"] = {"hologram"};
    return post("/api/feedback", tok, b);
  };

  s["aggregateFeedback:success"] = [=, this] { return get("/api/admin/feedback", admin_.token); };
  s["aggregateFeedback:not_admin"] = [=, this] { return get("/api/admin/feedback", tok); };

  s["health:success"] = [=, this] { return get("/healthz", ""); };
  return s;
}

std::string concrete_path(const std::string& path) {
  const auto brace = path.find("{id}");
  if (brace == std::string::npos) return path;
  return path.substr(0, brace) + "some-id" + path.substr(brace + 4);
}

ContractReport Sweep::run() {
  ContractReport report;
  auto table = scenarios();
  const std::vector<ErrorCode> auth_codes = {ErrorCode::missing_token, ErrorCode::invalid_token,
                                             ErrorCode::expired_token};
  for (const auto& route : forensight::route_table()) {
    const std::string label = route.method + " " + route.path;
    auto record = [&](const std::string& name, std::string problem) {
      report.checks.push_back({label, name, problem.empty(), std::move(problem)});
    };

    if (route.requires_auth) {
      const auto path = concrete_path(route.path);
      for (auto code : auth_codes) {
        std::string token;
        if (code == ErrorCode::invalid_token) token = "not.a.token";
        if (code == ErrorCode::expired_token) token = expired_;
        const auto before = platform_->store().statement_count();
        auto res = route.method == "GET" ? get(path, token) : post(path, token, json::object());
        auto problem = envelope_problem(res, code);
        if (problem.empty() && platform_->store().statement_count() != before) {
          problem = "rejected request touched the store";
        }
        record(std::string(forensight::code_name(code)), problem);
      }
    }

    for (auto code : route.errors) {
      const std::string key = route.operation_id + ":" + std::string(forensight::code_name(code));
      const auto it = table.find(key);
      if (it == table.end()) {
        record(std::string(forensight::code_name(code)), "no scenario");
        continue;
      }
      record(std::string(forensight::code_name(code)), envelope_problem(it->second(), code));
      for (const auto& [extra, scenario] : table) {
        if (extra.rfind(key + ":", 0) == 0) record(extra.substr(route.operation_id.size() + 1),
                                                   envelope_problem(scenario(), code));
      }
    }

    const auto success = table.find(route.operation_id + ":success");
    if (success == table.end()) {
      record("success", "no scenario");
      continue;
    }
    const auto res = success->second();
    std::string problem;
    if (!res) {
      problem = "no response";
    } else if (res->status != route.success_status) {
      problem = "status " + std::to_string(res->status) + ": " + res->body;
    } else if (const auto body = json::parse(res->body, nullptr, false); body.is_discarded() || !body.is_object()) {
      problem = "body is not a JSON object";
    } else if (body.contains("error")) {
      problem = "success body carries an error";
    }
    record("success", problem);
  }

  // Paths outside the table still answer with the envelope.
  const std::string label = "unrouted";
  report.checks.push_back({label, "not_found", false, envelope_problem(get("/nope", ""), ErrorCode::not_found)});
  report.checks.back().passed = report.checks.back().detail.empty();
  report.checks.push_back(
      {label, "missing_token", false, envelope_problem(get("/api/nope", ""), ErrorCode::missing_token)});
  report.checks.back().passed = report.checks.back().detail.empty();
  return report;
}

}  // namespace

ContractReport run_contract_sweep() {
  Sweep sweep;
  return sweep.run();
}

}  // namespace testing
