#include "forensight/gateway.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>

#include <httplib.h>

#include "forensight/serialization.hpp"

namespace forensight {

using nlohmann::json;

namespace {

using enum ErrorCode;

constexpr std::string_view kApiVersion = "1.0.0";

const std::vector<ErrorCode> kAuthErrors = {missing_token, invalid_token, expired_token};

[[noreturn]] void bad_request(const std::string& message) { throw Error(invalid_request, message); }

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send(res, status_of(code), error_body(code_name(code), message));
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) bad_request("request body must be a JSON object");
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) bad_request("request body must be a JSON object");
  return body;
}

std::string string_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) bad_request(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string optional_string_field(const json& body, const char* key, std::string fallback = {}) {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_string()) bad_request(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::int64_t integer_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_number_integer()) bad_request(std::string("field '") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

std::vector<std::string> string_list_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) return {};
  if (!it->is_array()) bad_request(std::string("field '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) bad_request(std::string("field '") + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<int> parse_int(const std::string& text) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::string bearer_token(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) {
    throw Error(missing_token, "missing bearer token");
  }
  return header.substr(prefix.size());
}

bool is_public(const httplib::Request& req) {
  if (req.method == "GET" && req.path == "/openapi.json") return true;
  if (req.path.rfind("/api/", 0) != 0) return true;  // unrouted paths fall through to 404
  for (const auto& r : route_table()) {
    if (!r.requires_auth && r.method == req.method && r.path == req.path) return true;
  }
  return false;
}

std::string httplib_pattern(const std::string& openapi_path) {
  std::string out;
  for (char c : openapi_path) {
    if (c == '{') {
      out.push_back(':');
    } else if (c != '}') {
      out.push_back(c);
    }
  }
  return out;
}

json error_schema_ref() { return {{"$ref", "#/components/schemas/Error"}}; }

json success_schema(const std::string& operation_id) {
  static const std::map<std::string, json> schemas = {
      {"register", {{"$ref", "#/components/schemas/User"}}},
      {"login",
       {{"type", "object"},
        {"required", {"token", "token_type", "expires_in"}},
        {"properties",
         {{"token", {{"type", "string"}}},
          {"token_type", {{"type", "string"}}},
          {"expires_in", {{"type", "integer"}}}}}}},
      {"getCredits",
       {{"type", "object"},
        {"required", {"balance", "entries"}},
        {"properties",
         {{"balance", {{"type", "integer"}}},
          {"entries", {{"type", "array"}, {"items", {{"$ref", "#/components/schemas/CreditEntry"}}}}}}}}},
      {"grantCredits",
       {{"type", "object"},
        {"required", {"entry", "balance"}},
        {"properties",
         {{"entry", {{"$ref", "#/components/schemas/CreditEntry"}}}, {"balance", {{"type", "integer"}}}}}}},
      {"createUpload", {{"$ref", "#/components/schemas/Upload"}}},
      {"listDetectors",
       {{"type", "object"},
        {"required", {"detectors"}},
        {"properties",
         {{"detectors", {{"type", "array"}, {"items", {{"$ref", "#/components/schemas/Detector"}}}}}}}}},
      {"runInference", {{"$ref", "#/components/schemas/Prediction"}}},
      {"getPrediction", {{"$ref", "#/components/schemas/Prediction"}}},
      {"listHistory",
       {{"type", "object"},
        {"required", {"page", "page_size", "items"}},
        {"properties",
         {{"page", {{"type", "integer"}}},
          {"page_size", {{"type", "integer"}}},
          {"items", {{"type", "array"}, {"items", {{"$ref", "#/components/schemas/Prediction"}}}}}}}}},
      {"createSession", {{"$ref", "#/components/schemas/Session"}}},
      {"sendMessage",
       {{"type", "object"},
        {"required", {"reply", "session"}},
        {"properties",
         {{"reply", {{"$ref", "#/components/schemas/Turn"}}},
          {"session", {{"$ref", "#/components/schemas/Session"}}}}}}},
      {"getStatistics", {{"$ref", "#/components/schemas/Statistics"}}},
      {"submitFeedback",
       {{"type", "object"},
        {"required", {"feedback_id"}},
        {"properties", {{"feedback_id", {{"type", "string"}}}}}}},
      {"aggregateFeedback", {{"$ref", "#/components/schemas/FeedbackSummary"}}},
      {"health",
       {{"type", "object"}, {"required", {"status"}}, {"properties", {{"status", {{"type", "string"}}}}}}},
  };
  return schemas.at(operation_id);
}

std::optional<json> request_schema(const std::string& operation_id) {
  const auto str = json{{"type", "string"}};
  const auto str_list = json{{"type", "array"}, {"items", str}};
  if (operation_id == "register") {
    return json{{"type", "object"},
                {"required", {"name", "email", "position", "region", "password", "password_confirm"}},
                {"properties",
                 {{"name", str},
                  {"email", str},
                  {"position", str},
                  {"region", str},
                  {"password", str},
                  {"password_confirm", str}}}};
  }
  if (operation_id == "login") {
    return json{{"type", "object"}, {"required", {"email", "password"}}, {"properties", {{"email", str}, {"password", str}}}};
  }
  if (operation_id == "grantCredits") {
    return json{{"type", "object"},
                {"required", {"user_id", "amount"}},
                {"properties", {{"user_id", str}, {"amount", {{"type", "integer"}}}, {"note", str}}}};
  }
  if (operation_id == "runInference") {
    return json{{"type", "object"},
                {"required", {"upload_id", "detector_id"}},
                {"properties", {{"upload_id", str}, {"detector_id", str}}}};
  }
  if (operation_id == "createSession") {
    return json{{"type", "object"},
                {"required", {"model_id"}},
                {"properties", {{"model_id", str}, {"attachment_id", str}}}};
  }
  if (operation_id == "sendMessage") {
    return json{{"type", "object"}, {"required", {"prompt"}}, {"properties", {{"prompt", str}}}};
  }
  if (operation_id == "submitFeedback") {
    return json{{"type", "object"},
                {"required", {"rating", "most_accurate_model"}},
                {"properties",
                 {{"models_used", str_list},
                  {"formats_used", str_list},
                  {"most_accurate_model", str},
                  {"useful_features", str},
                  {"improvements", str},
                  {"rating", {{"type", "integer"}, {"minimum", 1}, {"maximum", 5}}},
                  {"user_role", str},
                  {"prior_exposure", {{"type", "boolean"}}},
                  {"free_text", str}}}};
  }
  return std::nullopt;
}

json component_schemas() {
  const auto str = json{{"type", "string"}};
  const auto integer = json{{"type", "integer"}};
  const auto number = json{{"type", "number"}};
  const auto counts = json{{"type", "object"}, {"additionalProperties", integer}};
  const auto face = json{{"type", "object"},
                         {"properties",
                          {{"bbox", {{"type", "array"}, {"items", integer}, {"minItems", 4}, {"maxItems", 4}}},
                           {"score", number}}}};
  return {
      {"Error",
       {{"type", "object"},
        {"required", {"error"}},
        {"properties",
         {{"error",
           {{"type", "object"},
            {"required", {"code", "message"}},
            {"properties", {{"code", str}, {"message", str}}}}}}}}},
      {"User",
       {{"type", "object"},
        {"properties",
         {{"user_id", str}, {"name", str}, {"email", str}, {"position", str}, {"region", str}, {"created_at", str}}}}},
      {"CreditEntry",
       {{"type", "object"},
        {"properties",
         {{"entry_id", integer},
          {"delta", integer},
          {"reason", {{"type", "string"}, {"enum", {"initial_grant", "inference_charge", "inference_refund", "admin_grant"}}}},
          {"ref", {{"type", "string"}, {"nullable", true}}},
          {"note", str},
          {"timestamp", str}}}}},
      {"Upload",
       {{"type", "object"},
        {"properties",
         {{"upload_id", str},
          {"user_id", str},
          {"filename", str},
          {"modality", {{"type", "string"}, {"enum", {"image", "audio"}}}},
          {"format", {{"type", "string"}, {"enum", {"png", "jpeg", "avif", "wav", "mp3"}}}},
          {"byte_size", integer},
          {"content_hash", str},
          {"storage_ref", str},
          {"consent", {{"type", "boolean"}}},
          {"uploaded_at", str}}}}},
      {"Detector",
       {{"type", "object"},
        {"properties",
         {{"detector_id", str},
          {"display_name", str},
          {"modality", str},
          {"category", str},
          {"adapter_kind", str},
          {"version", str}}}}},
      {"Prediction",
       {{"type", "object"},
        {"properties",
         {{"prediction_id", str},
          {"upload_id", str},
          {"detector_id", str},
          {"modality", str},
          {"label", {{"type", "string"}, {"enum", {"real", "fake"}}}},
          {"score", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}},
          {"faces", {{"type", "array"}, {"nullable", true}, {"items", face}}},
          {"latency_ms", integer},
          {"created_at", str}}}}},
      {"Turn",
       {{"type", "object"},
        {"properties", {{"role", {{"type", "string"}, {"enum", {"user", "assistant"}}}}, {"text", str}, {"timestamp", str}}}}},
      {"Session",
       {{"type", "object"},
        {"properties",
         {{"session_id", str},
          {"model_id", str},
          {"attachment_id", {{"type", "string"}, {"nullable", true}}},
          {"transcript", {{"type", "string"}, {"nullable", true}}},
          {"turns", {{"type", "array"}, {"items", {{"$ref", "#/components/schemas/Turn"}}}}},
          {"created_at", str}}}}},
      {"Statistics",
       {{"type", "object"},
        {"properties",
         {{"total_users", integer},
          {"total_predictions", integer},
          {"real_count", integer},
          {"fake_count", integer},
          {"per_model", counts},
          {"per_modality", counts},
          {"per_category", counts},
          {"per_region_users", counts},
          {"generated_at", str}}}}},
      {"FeedbackSummary",
       {{"type", "object"},
        {"properties",
         {{"count", integer},
          {"rating_histogram", counts},
          {"mean_rating", {{"type", "number"}, {"nullable", true}}},
          {"most_accurate_tally", counts},
          {"format_tally", counts}}}}},
  };
}

}  // namespace

const std::vector<RouteSpec>& route_table() {
  static const std::vector<RouteSpec> routes = {
      {"POST", "/api/register", false, "register", "Create an account with the initial credit grant", 201,
       {invalid_request, invalid_field, invalid_email, invalid_region, mismatched_confirmation, weak_password,
        duplicate_email}},
      {"POST", "/api/login", false, "login", "Exchange credentials for a bearer token", 200,
       {invalid_request, invalid_credentials}},
      {"GET", "/api/credits", true, "getCredits", "Current balance and ledger", 200, {}},
      {"POST", "/api/admin/credits", true, "grantCredits", "Grant credits to a user (admin)", 201,
       {invalid_request, not_admin, unknown_user, invalid_amount}},
      {"POST", "/api/uploads", true, "createUpload", "Upload an image or audio file (multipart: file, consent)",
       201, {invalid_request, consent_required, unsupported_format, too_large}},
      {"GET", "/api/detectors", false, "listDetectors", "List detectors, optionally filtered by modality", 200,
       {invalid_request}},
      {"POST", "/api/inferences", true, "runInference", "Run one detector on one upload (costs one credit)", 201,
       {invalid_request, unknown_detector, mllm_not_allowed, not_found, forbidden, modality_mismatch,
        insufficient_credits, too_short, decode_failure, undecodable_format, adapter_unreachable, adapter_timeout,
        malformed_response}},
      {"GET", "/api/inferences/{id}", true, "getPrediction", "Fetch one prediction", 200, {not_found, forbidden}},
      {"GET", "/api/inferences", true, "listHistory", "Own predictions, newest first (page, page_size)", 200,
       {invalid_page}},
      {"POST", "/api/mllm/sessions", true, "createSession", "Open a multimodal chat session", 201,
       {invalid_request, unknown_model, not_found, foreign_upload, modality_mismatch}},
      {"POST", "/api/mllm/sessions/{id}/messages", true, "sendMessage",
       "Send a prompt to the session model (costs one credit)", 200,
       {invalid_request, invalid_field, session_not_found, insufficient_credits, attachment_required,
        adapter_unreachable, adapter_timeout, malformed_response, transcription_failed, analysis_failed,
        session_conflict}},
      {"GET", "/api/statistics", true, "getStatistics", "Platform-wide usage statistics", 200, {}},
      {"POST", "/api/feedback", true, "submitFeedback", "Submit the anonymised feedback form", 201,
       {invalid_request, invalid_rating, unknown_model_reference, invalid_field}},
      {"GET", "/api/admin/feedback", true, "aggregateFeedback", "Aggregated feedback (admin)", 200, {not_admin}},
      {"GET", "/healthz", false, "health", "Liveness probe", 200, {}},
  };
  return routes;
}

json openapi_document() {
  json paths = json::object();
  for (const auto& r : route_table()) {
    std::vector<ErrorCode> errors = r.errors;
    if (r.requires_auth) errors.insert(errors.begin(), kAuthErrors.begin(), kAuthErrors.end());

    json responses = json::object();
    responses[std::to_string(r.success_status)] = {
        {"description", "success"}, {"content", {{"application/json", {{"schema", success_schema(r.operation_id)}}}}}};
    std::map<int, std::vector<std::string>> by_status;
    for (auto code : errors) by_status[status_of(code)].emplace_back(code_name(code));
    for (const auto& [status, codes] : by_status) {
      std::string description;
      for (const auto& c : codes) description += (description.empty() ? "" : ", ") + c;
      responses[std::to_string(status)] = {
          {"description", description},
          {"x-error-codes", codes},
          {"content", {{"application/json", {{"schema", error_schema_ref()}}}}}};
    }

    json op = {{"operationId", r.operation_id}, {"summary", r.summary}, {"responses", responses}};
    if (r.requires_auth) op["security"] = json::array({{{"bearer", json::array()}}});
    if (r.path.find("{id}") != std::string::npos) {
      op["parameters"] = json::array({{{"name", "id"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}}});
    }
    if (r.operation_id == "listHistory") {
      op["parameters"] = json::array(
          {{{"name", "page"}, {"in", "query"}, {"schema", {{"type", "integer"}, {"minimum", 1}, {"default", 1}}}},
           {{"name", "page_size"},
            {"in", "query"},
            {"schema", {{"type", "integer"}, {"minimum", 1}, {"maximum", kMaxPageSize}, {"default", 20}}}}});
    }
    if (r.operation_id == "listDetectors") {
      op["parameters"] = json::array(
          {{{"name", "modality"}, {"in", "query"}, {"schema", {{"type", "string"}, {"enum", {"image", "audio"}}}}}});
    }
    if (r.operation_id == "createUpload") {
      op["requestBody"] = {
          {"required", true},
          {"content",
           {{"multipart/form-data",
             {{"schema",
               {{"type", "object"},
                {"required", {"file", "consent"}},
                {"properties",
                 {{"file", {{"type", "string"}, {"format", "binary"}}}, {"consent", {{"type", "boolean"}}}}}}}}}}}};
    } else if (auto schema = request_schema(r.operation_id)) {
      op["requestBody"] = {{"required", true}, {"content", {{"application/json", {{"schema", *schema}}}}}};
    }
    std::string method = r.method;
    std::transform(method.begin(), method.end(), method.begin(), [](unsigned char c) { return std::tolower(c); });
    paths[r.path][method] = op;
  }
  json components = {{"schemas", component_schemas()}};
  components["securitySchemes"]["bearer"] = {{"type", "http"}, {"scheme", "bearer"}, {"bearerFormat", "JWT"}};
  return {{"openapi", "3.0.3"},
          {"info", {{"title", "forensight"}, {"version", kApiVersion}}},
          {"paths", paths},
          {"components", components}};
}

Gateway::Gateway(Platform& platform) : platform_(platform), server_(std::make_unique<httplib::Server>()) {
  const auto& cfg = platform_.config();
  const auto threads = static_cast<std::size_t>(cfg.worker_threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // Multipart framing adds a little on top of the largest accepted file.
  server_->set_payload_max_length(static_cast<std::size_t>(std::max(cfg.limits.image_bytes, cfg.limits.audio_bytes)) + 64 * 1024);
  // httplib defaults to SO_REUSEPORT, which would let a second process share
  // an occupied port silently. Address reuse alone keeps restarts quick.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

Gateway::~Gateway() = default;

int Gateway::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(bind_failure, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(bind_failure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Gateway::listen() { server_->listen_after_bind(); }

void Gateway::stop() { server_->stop(); }

bool Gateway::running() const { return server_->is_running(); }

void Gateway::install_routes() {
  auto& p = platform_;
  auto& s = *server_;
  const std::string origin = p.config().ui_origin;

  s.set_pre_routing_handler([&p, origin](const httplib::Request& req, httplib::Response& res) {
    if (req.method == "OPTIONS") {
      if (origin.empty() || req.get_header_value("Origin") != origin) {
        send_error(res, forbidden, "origin not allowed");
      } else {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
        res.set_header("Access-Control-Max-Age", "600");
      }
      return httplib::Server::HandlerResponse::Handled;
    }
    if (is_public(req)) return httplib::Server::HandlerResponse::Unhandled;
    // Token checks are pure: nothing below touches the store.
    try {
      p.accounts().authenticate(bearer_token(req));
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  s.set_post_routing_handler([origin](const httplib::Request& req, httplib::Response& res) {
    if (!origin.empty() && req.get_header_value("Origin") == origin) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, invalid_request, e.what());
    } catch (const std::exception& e) {
      std::cerr << "unhandled: " << e.what() << '\n';
      send_error(res, internal, "internal error");
    } catch (...) {
      send_error(res, internal, "internal error");
    }
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    const int status = res.status;
    ErrorCode code = status >= 500 ? internal : invalid_request;
    std::string message = httplib::status_message(status);
    if (status == 404) code = not_found;
    if (status == 413) code = too_large;
    send(res, status, error_body(code_name(code), message));
    return httplib::Server::HandlerResponse::Handled;
  });

  auto user_of = [&p](const httplib::Request& req) { return p.accounts().authenticate(bearer_token(req)); };

  std::map<std::string, httplib::Server::Handler> handlers;

  handlers["register"] = [&p](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    Registration form;
    form.name = string_field(body, "name");
    form.email = string_field(body, "email");
    form.position = optional_string_field(body, "position");
    form.region = string_field(body, "region");
    form.password = string_field(body, "password");
    form.password_confirm = string_field(body, "password_confirm");
    send(res, 201, as_json(p.accounts().register_user(form)));
  };

  handlers["login"] = [&p](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto token = p.accounts().login(string_field(body, "email"), string_field(body, "password"));
    send(res, 200,
         {{"token", token}, {"token_type", "Bearer"}, {"expires_in", p.accounts().config().token_ttl_seconds}});
  };

  handlers["getCredits"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    // Balance and entries come from one snapshot so they always agree.
    const auto entries = p.accounts().ledger(user);
    std::int64_t balance = 0;
    json list = json::array();
    for (const auto& e : entries) {
      balance += e.delta;
      list.push_back(as_json(e));
    }
    send(res, 200, {{"balance", balance}, {"entries", list}});
  };

  handlers["grantCredits"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto admin = user_of(req);
    const auto body = parse_body(req);
    const auto target = string_field(body, "user_id");
    const auto entry =
        p.accounts().grant_credits(admin, target, integer_field(body, "amount"), optional_string_field(body, "note"));
    send(res, 201, {{"entry", as_json(entry)}, {"balance", p.accounts().get_balance(target)}});
  };

  handlers["createUpload"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    if (!req.is_multipart_form_data()) bad_request("uploads must be multipart/form-data");
    if (!req.has_file("file")) bad_request("missing 'file' part");
    const auto file = req.get_file_value("file");
    bool consent = false;
    if (req.has_file("consent")) {
      const auto value = req.get_file_value("consent").content;
      if (value == "true" || value == "1" || value == "on") {
        consent = true;
      } else if (value != "false" && value != "0" && value != "off") {
        bad_request("'consent' must be a boolean");
      }
    }
    const auto* data = reinterpret_cast<const std::uint8_t*>(file.content.data());
    const auto upload = p.media().ingest(user, file.filename, ByteView(data, file.content.size()), consent);
    send(res, 201, as_json(upload));
  };

  handlers["listDetectors"] = [&p](const httplib::Request& req, httplib::Response& res) {
    std::optional<Modality> filter;
    if (req.has_param("modality")) {
      filter = parse_modality(req.get_param_value("modality"));
      if (!filter) bad_request("modality must be image or audio");
    }
    json list = json::array();
    for (const auto& d : p.registry().list(filter)) list.push_back(as_json(d));
    send(res, 200, {{"detectors", list}});
  };

  handlers["runInference"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    const auto body = parse_body(req);
    const auto prediction =
        p.orchestrator().run_inference(user, string_field(body, "upload_id"), string_field(body, "detector_id"));
    send(res, 201, as_json(prediction));
  };

  handlers["getPrediction"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, as_json(p.orchestrator().get_prediction(user_of(req), req.path_params.at("id"))));
  };

  handlers["listHistory"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    auto query_int = [&req](const char* key, int fallback) {
      if (!req.has_param(key)) return fallback;
      const auto v = parse_int(req.get_param_value(key));
      if (!v) throw Error(invalid_page, std::string(key) + " must be an integer");
      return *v;
    };
    const int page = query_int("page", 1);
    const int page_size = query_int("page_size", 20);
    json items = json::array();
    for (const auto& pr : p.orchestrator().list_history(user, page, page_size)) items.push_back(as_json(pr));
    send(res, 200, {{"page", page}, {"page_size", page_size}, {"items", items}});
  };

  handlers["createSession"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    const auto body = parse_body(req);
    std::optional<std::string> attachment;
    if (auto a = optional_string_field(body, "attachment_id"); !a.empty()) attachment = a;
    send(res, 201, as_json(p.mllm().create_session(user, string_field(body, "model_id"), attachment)));
  };

  handlers["sendMessage"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    const auto body = parse_body(req);
    const auto& session_id = req.path_params.at("id");
    const auto reply = p.mllm().send_message(user, session_id, string_field(body, "prompt"));
    send(res, 200, {{"reply", as_json(reply)}, {"session", as_json(p.mllm().get_session(user, session_id))}});
  };

  handlers["getStatistics"] = [&p](const httplib::Request&, httplib::Response& res) {
    const auto snapshot = p.analytics().compute_statistics();
    auto body = as_json(snapshot);
    body["per_category"] = per_category(snapshot, p.registry());
    send(res, 200, body);
  };

  handlers["submitFeedback"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    const auto user = user_of(req);
    const auto body = parse_body(req);
    FeedbackForm form;
    form.models_used = string_list_field(body, "models_used");
    form.formats_used = string_list_field(body, "formats_used");
    form.most_accurate_model = string_field(body, "most_accurate_model");
    form.useful_features = optional_string_field(body, "useful_features");
    form.improvements = optional_string_field(body, "improvements");
    form.rating = static_cast<int>(std::clamp<std::int64_t>(integer_field(body, "rating"), -1, 1000));
    form.user_role = optional_string_field(body, "user_role");
    if (auto it = body.find("prior_exposure"); it != body.end() && !it->is_null()) {
      if (!it->is_boolean()) bad_request("field 'prior_exposure' must be a boolean");
      form.prior_exposure = it->get<bool>();
    }
    if (auto t = optional_string_field(body, "free_text"); !t.empty()) form.free_text = t;
    send(res, 201, {{"feedback_id", p.analytics().submit_feedback(user, form)}});
  };

  handlers["aggregateFeedback"] = [&p, user_of](const httplib::Request& req, httplib::Response& res) {
    if (!p.accounts().is_admin(user_of(req))) throw Error(not_admin, "admin only");
    send(res, 200, as_json(p.analytics().aggregate_feedback()));
  };

  handlers["health"] = [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); };

  for (const auto& r : route_table()) {
    const auto pattern = httplib_pattern(r.path);
    const auto& handler = handlers.at(r.operation_id);
    if (r.method == "GET") {
      s.Get(pattern, handler);
    } else {
      s.Post(pattern, handler);
    }
  }

  s.Get("/openapi.json", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, openapi_document());
  });
}

}  // namespace forensight
