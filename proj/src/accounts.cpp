#include "forensight/accounts.hpp"

#include <algorithm>
#include <cctype>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"
#include "forensight/regions.hpp"
#include "forensight/token.hpp"

namespace forensight {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

constexpr std::string_view kEntryColumns =
    "entry_id, user_id, delta, reason, ref, note, created_at";

CreditEntry read_entry(const Statement& st) {
  return CreditEntry{st.column_int(0),
                     st.column_text(1),
                     st.column_int(2),
                     parse_credit_reason(st.column_text(3)),
                     st.column_optional_text(4),
                     st.column_optional_text(5),
                     st.column_int(6)};
}

CreditEntry append(Connection& c, const std::string& user_id, std::int64_t delta,
                   CreditReason reason, const std::optional<std::string>& ref,
                   const std::optional<std::string>& note, Micros now) {
  auto st = c.prepare(
      "INSERT INTO CREDITS (user_id, delta, reason, ref, note, created_at) VALUES (?, ?, ?, ?, ?, ?)");
  st.bind(1, user_id).bind(2, delta).bind(3, to_string(reason)).bind(4, ref).bind(5, note).bind(6, now);
  st.run();
  auto id = c.prepare("SELECT last_insert_rowid()");
  id.step();
  return CreditEntry{id.column_int(0), user_id, delta, reason, ref, note, now};
}

bool user_exists(Connection& c, const std::string& user_id) {
  auto st = c.prepare("SELECT 1 FROM USERS WHERE user_id = ?");
  st.bind(1, user_id);
  return st.step();
}

}  // namespace

std::string_view to_string(CreditReason reason) {
  switch (reason) {
    case CreditReason::initial_grant: return "initial_grant";
    case CreditReason::inference_charge: return "inference_charge";
    case CreditReason::inference_refund: return "inference_refund";
    case CreditReason::admin_grant: return "admin_grant";
  }
  return "initial_grant";
}

CreditReason parse_credit_reason(std::string_view text) {
  if (text == "initial_grant") return CreditReason::initial_grant;
  if (text == "inference_charge") return CreditReason::inference_charge;
  if (text == "inference_refund") return CreditReason::inference_refund;
  if (text == "admin_grant") return CreditReason::admin_grant;
  throw Error(ErrorCode::persistence_failure, "unknown credit reason in store: " + std::string(text));
}

bool meets_password_policy(std::string_view password) {
  const bool letter = std::any_of(password.begin(), password.end(),
                                  [](unsigned char c) { return std::isalpha(c); });
  const bool digit = std::any_of(password.begin(), password.end(),
                                 [](unsigned char c) { return std::isdigit(c); });
  return password.size() >= 8 && letter && digit;
}

bool is_valid_email(std::string_view email) {
  const auto at = email.find('@');
  if (at == std::string_view::npos || at == 0 || email.find('@', at + 1) != std::string_view::npos) {
    return false;
  }
  if (std::any_of(email.begin(), email.end(),
                  [](unsigned char c) { return std::isspace(c) || std::iscntrl(c); })) {
    return false;
  }
  const auto domain = email.substr(at + 1);
  const auto dot = domain.rfind('.');
  return dot != std::string_view::npos && dot > 0 && dot + 1 < domain.size() &&
         domain.find("..") == std::string_view::npos;
}

Accounts::Accounts(Store& store, AccountsConfig config, Clock clock)
    : store_(store), config_(std::move(config)), clock_(std::move(clock)) {
  if (config_.token_key.empty()) {
    throw Error(ErrorCode::invalid_config, "token signing key must not be empty");
  }
  for (auto& email : config_.admin_emails) email = lower(trim(email));
  dummy_hash_ = crypto::hash_password("dummy-password-0", config_.bcrypt_cost);
}

UserAccount Accounts::register_user(const Registration& form) {
  UserAccount account;
  account.name = trim(form.name);
  account.email = lower(trim(form.email));
  account.position = trim(form.position);
  account.region = upper(trim(form.region));

  if (account.name.empty()) throw Error(ErrorCode::invalid_field, "name is required");
  if (!is_valid_email(account.email)) throw Error(ErrorCode::invalid_email, "email is not valid");
  if (!is_known_region(account.region)) {
    throw Error(ErrorCode::invalid_region, "region must be an ISO 3166-1 alpha-2 code");
  }
  if (form.password != form.password_confirm) {
    throw Error(ErrorCode::mismatched_confirmation, "password confirmation does not match");
  }
  if (!meets_password_policy(form.password)) {
    throw Error(ErrorCode::weak_password,
                "password needs at least 8 characters including a letter and a digit");
  }

  account.user_id = crypto::new_id();
  account.password_hash = crypto::hash_password(form.password, config_.bcrypt_cost);
  account.created_at = clock_();

  try {
    store_.transactional([&](Connection& c) {
      auto st = c.prepare(
          "INSERT INTO USERS (user_id, name, email, position, region, password_hash, created_at) "
          "VALUES (?, ?, ?, ?, ?, ?, ?)");
      st.bind(1, account.user_id).bind(2, account.name).bind(3, account.email);
      st.bind(4, account.position).bind(5, account.region).bind(6, account.password_hash);
      st.bind(7, account.created_at);
      st.run();
      append(c, account.user_id, kInitialCredits, CreditReason::initial_grant, std::nullopt,
             std::nullopt, account.created_at);
    });
  } catch (const ConstraintError&) {
    throw Error(ErrorCode::duplicate_email, "an account with this email already exists");
  }
  return account;
}

std::string Accounts::login(std::string_view email, std::string_view password) {
  const std::string normalized = lower(trim(email));
  auto found = store_.read([&](Connection& c) -> std::optional<std::pair<std::string, std::string>> {
    auto st = c.prepare("SELECT user_id, password_hash FROM USERS WHERE email = ?");
    st.bind(1, normalized);
    if (!st.step()) return std::nullopt;
    return std::pair{st.column_text(0), st.column_text(1)};
  });
  // Unknown emails still pay for one bcrypt verification.
  const bool ok = crypto::verify_password(password, found ? found->second : dummy_hash_) && found;
  if (!ok) throw Error(ErrorCode::invalid_credentials, "invalid email or password");

  const std::int64_t issued = clock_() / kMicrosPerSecond;
  return sign_token({found->first, issued, issued + config_.token_ttl_seconds}, config_.token_key);
}

std::string Accounts::authenticate(std::string_view token) const {
  return verify_token(token, config_.token_key, clock_()).subject;
}

std::int64_t Accounts::balance_in(Connection& c, const std::string& user_id) {
  auto st = c.prepare("SELECT COALESCE(SUM(delta), 0) FROM CREDITS WHERE user_id = ?");
  st.bind(1, user_id);
  st.step();
  return st.column_int(0);
}

CreditEntry Accounts::charge_in(Connection& c, const std::string& user_id,
                                const std::optional<std::string>& ref, Micros now) {
  if (!user_exists(c, user_id)) throw Error(ErrorCode::unknown_user, "unknown user");
  if (balance_in(c, user_id) < kInferenceCost) {
    throw Error(ErrorCode::insufficient_credits, "no credits left; request more from an administrator");
  }
  return append(c, user_id, -kInferenceCost, CreditReason::inference_charge, ref, std::nullopt, now);
}

CreditEntry Accounts::refund_in(Connection& c, const std::string& user_id,
                                std::int64_t charge_entry_id, Micros now) {
  {
    auto st = c.prepare("SELECT reason FROM CREDITS WHERE entry_id = ? AND user_id = ?");
    st.bind(1, charge_entry_id).bind(2, user_id);
    if (!st.step() || st.column_text(0) != "inference_charge") {
      throw Error(ErrorCode::unknown_charge, "no such charge for this user");
    }
  }
  const std::string ref = std::to_string(charge_entry_id);
  {
    auto st = c.prepare("SELECT 1 FROM CREDITS WHERE reason = 'inference_refund' AND ref = ?");
    st.bind(1, ref);
    if (st.step()) throw Error(ErrorCode::double_refund, "charge already refunded");
  }
  try {
    return append(c, user_id, kInferenceCost, CreditReason::inference_refund, ref, std::nullopt, now);
  } catch (const ConstraintError&) {
    throw Error(ErrorCode::double_refund, "charge already refunded");
  }
}

CreditEntry Accounts::charge_credit(const std::string& user_id, std::optional<std::string> ref) {
  const Micros now = clock_();
  return store_.transactional([&](Connection& c) { return charge_in(c, user_id, ref, now); });
}

CreditEntry Accounts::refund_credit(const std::string& user_id, std::int64_t charge_entry_id) {
  const Micros now = clock_();
  return store_.transactional(
      [&](Connection& c) { return refund_in(c, user_id, charge_entry_id, now); });
}

CreditEntry Accounts::grant_credits(const std::string& admin_user_id, const std::string& user_id,
                                    std::int64_t amount, std::string note) {
  if (!is_admin(admin_user_id)) throw Error(ErrorCode::not_admin, "admin role required");
  if (amount < 1) throw Error(ErrorCode::invalid_amount, "amount must be at least 1");
  const Micros now = clock_();
  return store_.transactional([&](Connection& c) {
    if (!user_exists(c, user_id)) throw Error(ErrorCode::unknown_user, "unknown user");
    return append(c, user_id, amount, CreditReason::admin_grant, std::nullopt,
                  note.empty() ? std::nullopt : std::optional<std::string>(note), now);
  });
}

std::int64_t Accounts::get_balance(const std::string& user_id) {
  return store_.read([&](Connection& c) {
    if (!user_exists(c, user_id)) throw Error(ErrorCode::unknown_user, "unknown user");
    return balance_in(c, user_id);
  });
}

std::vector<CreditEntry> Accounts::ledger(const std::string& user_id) {
  return store_.read([&](Connection& c) {
    auto st = c.prepare("SELECT " + std::string(kEntryColumns) +
                        " FROM CREDITS WHERE user_id = ? ORDER BY entry_id");
    st.bind(1, user_id);
    std::vector<CreditEntry> entries;
    while (st.step()) entries.push_back(read_entry(st));
    return entries;
  });
}

std::optional<UserAccount> Accounts::find_user(const std::string& user_id) {
  return store_.read([&](Connection& c) -> std::optional<UserAccount> {
    auto st = c.prepare(
        "SELECT user_id, name, email, position, region, password_hash, created_at FROM USERS "
        "WHERE user_id = ?");
    st.bind(1, user_id);
    if (!st.step()) return std::nullopt;
    return UserAccount{st.column_text(0), st.column_text(1), st.column_text(2), st.column_text(3),
                       st.column_text(4), st.column_text(5), st.column_int(6)};
  });
}

bool Accounts::is_admin(const std::string& user_id) {
  if (config_.admin_emails.empty()) return false;
  const auto user = find_user(user_id);
  return user && std::find(config_.admin_emails.begin(), config_.admin_emails.end(), user->email) !=
                     config_.admin_emails.end();
}

}  // namespace forensight
