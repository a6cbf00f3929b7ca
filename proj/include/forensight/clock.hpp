#pragma once

#include <cstdint>
#include <atomic>
#include <functional>
#include <memory>

namespace forensight {

/// UTC time as microseconds since the Unix epoch. Stored verbatim in every
/// timestamp column.
using Micros = std::int64_t;

constexpr Micros kMicrosPerSecond = 1'000'000;

/// Source of "now"; injectable so expiry logic is testable.
using Clock = std::function<Micros()>;

Clock system_clock();

/// A clock that reads from a shared counter the test controls.
class ManualClock {
 public:
  explicit ManualClock(Micros start = 1'700'000'000 * kMicrosPerSecond);

  Clock clock() const;
  void set(Micros t);
  void advance(Micros delta);
  Micros now() const;

 private:
  std::shared_ptr<std::atomic<Micros>> now_;
};

}  // namespace forensight
