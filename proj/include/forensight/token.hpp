#pragma once

#include <string>
#include <string_view>

#include "forensight/clock.hpp"

namespace forensight {

/// Registered claims carried by a session token. Times are whole seconds, as
/// JWT NumericDate requires.
struct TokenClaims {
  std::string subject;
  std::int64_t issued_at = 0;
  std::int64_t expires_at = 0;
};

/// JWT compact serialization, HS256, claims {sub, iat, exp}.
std::string sign_token(const TokenClaims& claims, std::string_view key);

/// Verifies signature first, then expiry. Throws invalid_token or
/// expired_token (expired when now >= exp).
TokenClaims verify_token(std::string_view token, std::string_view key, Micros now);

}  // namespace forensight
