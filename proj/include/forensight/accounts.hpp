#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forensight/clock.hpp"
#include "forensight/store.hpp"

namespace forensight {

inline constexpr std::int64_t kInitialCredits = 20;
inline constexpr std::int64_t kInferenceCost = 1;

struct UserAccount {
  std::string user_id;
  std::string name;
  std::string email;
  std::string position;
  std::string region;
  std::string password_hash;
  Micros created_at = 0;
};

enum class CreditReason { initial_grant, inference_charge, inference_refund, admin_grant };

std::string_view to_string(CreditReason reason);
CreditReason parse_credit_reason(std::string_view text);

struct CreditEntry {
  std::int64_t entry_id = 0;
  std::string user_id;
  std::int64_t delta = 0;
  CreditReason reason = CreditReason::initial_grant;
  // Charges: the prediction/session being paid for. Refunds: the refunded
  // charge's entry_id, in decimal.
  std::optional<std::string> ref;
  std::optional<std::string> note;
  Micros timestamp = 0;
};

struct Registration {
  std::string name;
  std::string email;
  std::string position;
  std::string region;
  std::string password;
  std::string password_confirm;
};

struct AccountsConfig {
  std::string token_key;
  std::int64_t token_ttl_seconds = 24 * 60 * 60;
  std::vector<std::string> admin_emails;
  int bcrypt_cost = 10;
};

/// Password floor: at least 8 characters, one letter, one digit.
bool meets_password_policy(std::string_view password);
bool is_valid_email(std::string_view email);

/// Registration, login, bearer tokens, and the append-only credit ledger.
/// Holds no per-request state; every mutation is one store transaction.
class Accounts {
 public:
  Accounts(Store& store, AccountsConfig config, Clock clock);

  UserAccount register_user(const Registration& form);
  /// Returns a signed token. Unknown email and wrong password are
  /// indistinguishable (both invalid_credentials).
  std::string login(std::string_view email, std::string_view password);
  /// Returns the token subject or throws invalid_token / expired_token.
  std::string authenticate(std::string_view token) const;

  CreditEntry charge_credit(const std::string& user_id, std::optional<std::string> ref = {});
  CreditEntry refund_credit(const std::string& user_id, std::int64_t charge_entry_id);
  CreditEntry grant_credits(const std::string& admin_user_id, const std::string& user_id,
                            std::int64_t amount, std::string note = {});
  std::int64_t get_balance(const std::string& user_id);

  std::vector<CreditEntry> ledger(const std::string& user_id);
  std::optional<UserAccount> find_user(const std::string& user_id);
  bool is_admin(const std::string& user_id);

  // Variants that run inside a caller's transaction, so the orchestrator can
  // commit a refund together with its failure log.
  static CreditEntry charge_in(Connection& c, const std::string& user_id,
                               const std::optional<std::string>& ref, Micros now);
  static CreditEntry refund_in(Connection& c, const std::string& user_id,
                               std::int64_t charge_entry_id, Micros now);
  static std::int64_t balance_in(Connection& c, const std::string& user_id);

  const AccountsConfig& config() const { return config_; }
  Micros now() const { return clock_(); }

 private:
  Store& store_;
  AccountsConfig config_;
  Clock clock_;
  std::string dummy_hash_;
};

}  // namespace forensight
