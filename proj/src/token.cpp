#include "forensight/token.hpp"

#include <json.hpp>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

using nlohmann::json;

constexpr std::string_view kHeader = R"({"alg":"HS256","typ":"JWT"})";

[[noreturn]] void reject(const char* why) { throw Error(ErrorCode::invalid_token, why); }

json decode_segment(std::string_view segment) {
  auto raw = crypto::base64url_decode(segment);
  if (!raw) reject("segment is not base64url");
  json parsed = json::parse(raw->begin(), raw->end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) reject("segment is not a JSON object");
  return parsed;
}

}  // namespace

std::string sign_token(const TokenClaims& claims, std::string_view key) {
  const json payload = {{"sub", claims.subject}, {"iat", claims.issued_at}, {"exp", claims.expires_at}};
  std::string input = crypto::base64url_encode(crypto::as_bytes(kHeader)) + "." +
                      crypto::base64url_encode(crypto::as_bytes(payload.dump()));
  const auto mac = crypto::hmac_sha256(crypto::as_bytes(key), crypto::as_bytes(input));
  return input + "." + crypto::base64url_encode(mac);
}

TokenClaims verify_token(std::string_view token, std::string_view key, Micros now) {
  const auto first = token.find('.');
  const auto last = token.rfind('.');
  if (first == std::string_view::npos || first == last) reject("not a compact JWT");

  const auto signing_input = token.substr(0, last);
  const auto signature = crypto::base64url_decode(token.substr(last + 1));
  if (!signature) reject("signature is not base64url");
  const auto expected = crypto::hmac_sha256(crypto::as_bytes(key), crypto::as_bytes(signing_input));
  if (!crypto::equal(*signature, expected)) reject("bad signature");

  const json header = decode_segment(token.substr(0, first));
  if (header.value("alg", "") != "HS256") reject("unsupported alg");
  const json payload = decode_segment(token.substr(first + 1, last - first - 1));
  if (!payload.contains("sub") || !payload["sub"].is_string() || !payload.contains("exp") ||
      !payload["exp"].is_number_integer() || !payload.contains("iat") ||
      !payload["iat"].is_number_integer()) {
    reject("missing claims");
  }

  TokenClaims claims{payload["sub"].get<std::string>(), payload["iat"].get<std::int64_t>(),
                     payload["exp"].get<std::int64_t>()};
  if (now >= claims.expires_at * kMicrosPerSecond) {
    throw Error(ErrorCode::expired_token, "token expired");
  }
  return claims;
}

}  // namespace forensight
