#include "forensight/store.hpp"

#include <algorithm>
#include <thread>

namespace forensight {

namespace {

[[noreturn]] void raise(sqlite3* db, int rc, std::string_view what) {
  const std::string message = std::string(what) + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
  const int primary = rc & 0xFF;
  if (primary == SQLITE_BUSY || primary == SQLITE_LOCKED) {
    throw BusyError(message);
  }
  if (primary == SQLITE_CONSTRAINT) {
    throw ConstraintError(message);
  }
  throw Error(ErrorCode::persistence_failure, message);
}

}  // namespace

const std::vector<Migration>& builtin_migrations() {
  static const std::vector<Migration> migrations = {
#include "forensight/migrations_embedded.inc"
  };
  return migrations;
}

// --- Statement ---------------------------------------------------------------

Statement::Statement(sqlite3* db, sqlite3_stmt* stmt, std::atomic<std::uint64_t>* counter)
    : db_(db), stmt_(stmt) {
  if (counter) {
    counter->fetch_add(1, std::memory_order_relaxed);
  }
}

Statement::Statement(Statement&& other) noexcept : db_(other.db_), stmt_(other.stmt_) {
  other.stmt_ = nullptr;
}

Statement::~Statement() {
  if (stmt_) {
    sqlite3_finalize(stmt_);
  }
}

Statement& Statement::bind(int index, std::int64_t value) {
  if (int rc = sqlite3_bind_int64(stmt_, index, value); rc != SQLITE_OK) raise(db_, rc, "bind");
  return *this;
}

Statement& Statement::bind(int index, double value) {
  if (int rc = sqlite3_bind_double(stmt_, index, value); rc != SQLITE_OK) raise(db_, rc, "bind");
  return *this;
}

Statement& Statement::bind(int index, std::string_view value) {
  if (int rc = sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()),
                                 SQLITE_TRANSIENT);
      rc != SQLITE_OK) {
    raise(db_, rc, "bind");
  }
  return *this;
}

Statement& Statement::bind(int index, const std::optional<std::string>& value) {
  return value ? bind(index, std::string_view(*value)) : bind_null(index);
}

Statement& Statement::bind_null(int index) {
  if (int rc = sqlite3_bind_null(stmt_, index); rc != SQLITE_OK) raise(db_, rc, "bind");
  return *this;
}

bool Statement::step() {
  const int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  raise(db_, rc, "step");
}

void Statement::run() {
  while (step()) {
  }
}

std::int64_t Statement::column_int(int index) const { return sqlite3_column_int64(stmt_, index); }

double Statement::column_double(int index) const { return sqlite3_column_double(stmt_, index); }

std::string Statement::column_text(int index) const {
  const auto* text = sqlite3_column_text(stmt_, index);
  const int size = sqlite3_column_bytes(stmt_, index);
  return text ? std::string(reinterpret_cast<const char*>(text), static_cast<std::size_t>(size))
              : std::string();
}

std::optional<std::string> Statement::column_optional_text(int index) const {
  if (column_is_null(index)) return std::nullopt;
  return column_text(index);
}

bool Statement::column_is_null(int index) const {
  return sqlite3_column_type(stmt_, index) == SQLITE_NULL;
}

// --- Connection --------------------------------------------------------------

Connection::Connection(const std::string& path, std::atomic<std::uint64_t>* counter)
    : counter_(counter) {
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX;
  if (int rc = sqlite3_open_v2(path.c_str(), &db_, flags, nullptr); rc != SQLITE_OK) {
    const std::string message = db_ ? sqlite3_errmsg(db_) : sqlite3_errstr(rc);
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::store_unreachable, "cannot open store " + path + ": " + message);
  }
  sqlite3_busy_timeout(db_, 10'000);
  // Switching to WAL needs a brief exclusive lock; another process may hold it.
  for (int attempt = 0;; ++attempt) {
    try {
      exec("PRAGMA journal_mode=WAL");
      break;
    } catch (const BusyError&) {
      if (attempt > 100) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  exec("PRAGMA foreign_keys=ON");
  exec("PRAGMA synchronous=NORMAL");
}

Connection::~Connection() { sqlite3_close(db_); }

void Connection::exec(std::string_view sql) {
  if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
  const std::string text(sql);
  char* err = nullptr;
  const int rc = sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err);
  sqlite3_free(err);
  if (rc != SQLITE_OK) raise(db_, rc, "exec");
}

Statement Connection::prepare(std::string_view sql) {
  sqlite3_stmt* stmt = nullptr;
  if (int rc = sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt, nullptr);
      rc != SQLITE_OK) {
    raise(db_, rc, "prepare");
  }
  return Statement(db_, stmt, counter_);
}

std::int64_t Connection::changes() const { return sqlite3_changes64(db_); }

// --- Store -------------------------------------------------------------------

std::unique_ptr<Store> Store::open(const std::string& url) {
  std::string path = url;
  if (url.rfind("sqlite://", 0) == 0) {
    path = url.substr(9);
  } else if (url.rfind("sqlite:", 0) == 0) {
    path = url.substr(7);
  } else if (url.find("://") != std::string::npos) {
    throw Error(ErrorCode::store_unreachable, "unsupported store backend: " + url);
  }
  if (path.empty()) {
    throw Error(ErrorCode::store_unreachable, "empty store path");
  }
  auto store = std::make_unique<Store>(path);
  store->lease();  // surfaces open failures now rather than on first request
  return store;
}

Store::Store(std::string path) : path_(std::move(path)) {}

Store::~Store() = default;

Store::Lease Store::lease() {
  {
    std::lock_guard lock(pool_mutex_);
    if (!pool_.empty()) {
      auto conn = std::move(pool_.back());
      pool_.pop_back();
      return Lease(*this, std::move(conn));
    }
  }
  return Lease(*this, std::make_unique<Connection>(path_, &counter_));
}

void Store::release(std::unique_ptr<Connection> conn) {
  if (!conn) return;
  std::lock_guard lock(pool_mutex_);
  pool_.push_back(std::move(conn));
}

int Store::schema_version() {
  return read([](Connection& c) {
    auto st = c.prepare("PRAGMA user_version");
    st.step();
    return static_cast<int>(st.column_int(0));
  });
}

int Store::migrate() {
  const auto& migrations = builtin_migrations();
  const int latest = migrations.empty() ? 0 : migrations.back().version;
  return transactional([&](Connection& c) {
    int current = 0;
    {
      auto st = c.prepare("PRAGMA user_version");
      st.step();
      current = static_cast<int>(st.column_int(0));
    }
    if (current > latest) {
      throw Error(ErrorCode::migration_conflict,
                  "store schema version " + std::to_string(current) +
                      " is newer than supported version " + std::to_string(latest));
    }
    for (const auto& m : migrations) {
      if (m.version <= current) continue;
      c.exec(m.sql);
      c.exec("PRAGMA user_version = " + std::to_string(m.version));
      current = m.version;
    }
    return current;
  });
}

}  // namespace forensight
