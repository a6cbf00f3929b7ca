#pragma once

#include <sqlite3.h>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "forensight/error.hpp"

namespace forensight {

struct Migration {
  int version;
  std::string_view name;
  std::string_view sql;
};

/// Migrations compiled from migrations/NNNN_*.sql, ascending by version.
const std::vector<Migration>& builtin_migrations();

/// A UNIQUE/CHECK/FOREIGN KEY violation; callers translate it to a domain error.
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when SQLite reports the database busy or locked; transactional()
/// retries on it.
class BusyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Statement {
 public:
  Statement(sqlite3* db, sqlite3_stmt* stmt, std::atomic<std::uint64_t>* counter);
  Statement(Statement&& other) noexcept;
  Statement& operator=(Statement&&) = delete;
  ~Statement();

  // Parameters are 1-based, as in SQLite.
  Statement& bind(int index, std::int64_t value);
  Statement& bind(int index, int value) { return bind(index, static_cast<std::int64_t>(value)); }
  Statement& bind(int index, double value);
  Statement& bind(int index, std::string_view value);
  Statement& bind(int index, const char* value) { return bind(index, std::string_view(value)); }
  Statement& bind(int index, const std::string& value) { return bind(index, std::string_view(value)); }
  Statement& bind(int index, const std::optional<std::string>& value);
  Statement& bind_null(int index);

  /// Advances; true while a row is available.
  bool step();
  /// Steps a statement expected to produce no rows.
  void run();

  std::int64_t column_int(int index) const;
  double column_double(int index) const;
  std::string column_text(int index) const;
  std::optional<std::string> column_optional_text(int index) const;
  bool column_is_null(int index) const;

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_;
};

class Connection {
 public:
  Connection(const std::string& path, std::atomic<std::uint64_t>* counter);
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  void exec(std::string_view sql);
  Statement prepare(std::string_view sql);
  std::int64_t changes() const;

 private:
  sqlite3* db_ = nullptr;
  std::atomic<std::uint64_t>* counter_;
};

/// Relational store over an embedded SQLite file. Every thread leases its own
/// connection from a pool; several processes may share the same file.
class Store {
 public:
  /// Accepts "sqlite://<path>", "sqlite:<path>" or a bare filesystem path.
  static std::unique_ptr<Store> open(const std::string& url);

  explicit Store(std::string path);
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
  ~Store();

  const std::string& path() const { return path_; }

  /// Applies pending migrations and returns the resulting schema version.
  /// Throws migration_conflict when the file is newer than this binary.
  int migrate();
  int schema_version();

  /// Runs fn inside BEGIN IMMEDIATE ... COMMIT. Writers are serialised across
  /// threads and processes; on SQLITE_BUSY the whole body is retried. Any
  /// exception rolls back.
  template <typename Fn>
  auto transactional(Fn&& fn) -> std::invoke_result_t<Fn&, Connection&>;

  /// Runs fn inside a deferred (read) transaction: one consistent snapshot.
  template <typename Fn>
  auto read(Fn&& fn) -> std::invoke_result_t<Fn&, Connection&>;

  /// Total statements executed through this store (prepared + exec).
  std::uint64_t statement_count() const { return counter_.load(); }

  int max_attempts = 50;

 private:
  class Lease {
   public:
    Lease(Store& store, std::unique_ptr<Connection> conn) : store_(store), conn_(std::move(conn)) {}
    Lease(const Lease&) = delete;
    ~Lease() { store_.release(std::move(conn_)); }
    Connection& operator*() { return *conn_; }

   private:
    Store& store_;
    std::unique_ptr<Connection> conn_;
  };

  Lease lease();
  void release(std::unique_ptr<Connection> conn);
  template <typename Fn>
  auto run_in_transaction(std::string_view begin, Fn& fn) -> std::invoke_result_t<Fn&, Connection&>;

  std::string path_;
  std::mutex pool_mutex_;
  std::vector<std::unique_ptr<Connection>> pool_;
  std::atomic<std::uint64_t> counter_{0};
};

template <typename Fn>
auto Store::run_in_transaction(std::string_view begin, Fn& fn)
    -> std::invoke_result_t<Fn&, Connection&> {
  using Result = std::invoke_result_t<Fn&, Connection&>;
  for (int attempt = 1;; ++attempt) {
    auto conn = lease();
    try {
      (*conn).exec(begin);
    } catch (const BusyError&) {
      if (attempt >= max_attempts) {
        throw Error(ErrorCode::conflict_retry_exhausted, "store busy");
      }
      continue;
    }
    try {
      if constexpr (std::is_void_v<Result>) {
        fn(*conn);
        (*conn).exec("COMMIT");
        return;
      } else {
        Result result = fn(*conn);
        (*conn).exec("COMMIT");
        return result;
      }
    } catch (const BusyError&) {
      try {
        (*conn).exec("ROLLBACK");
      } catch (...) {
      }
      if (attempt >= max_attempts) {
        throw Error(ErrorCode::conflict_retry_exhausted, "store busy");
      }
    } catch (...) {
      try {
        (*conn).exec("ROLLBACK");
      } catch (...) {
      }
      throw;
    }
  }
}

template <typename Fn>
auto Store::transactional(Fn&& fn) -> std::invoke_result_t<Fn&, Connection&> {
  return run_in_transaction("BEGIN IMMEDIATE", fn);
}

template <typename Fn>
auto Store::read(Fn&& fn) -> std::invoke_result_t<Fn&, Connection&> {
  return run_in_transaction("BEGIN DEFERRED", fn);
}

}  // namespace forensight
