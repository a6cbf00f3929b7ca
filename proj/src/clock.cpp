#include "forensight/clock.hpp"

#include <chrono>

namespace forensight {

Clock system_clock() {
  return [] {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
  };
}

ManualClock::ManualClock(Micros start) : now_(std::make_shared<std::atomic<Micros>>(start)) {}

Clock ManualClock::clock() const {
  return [now = now_] { return now->load(); };
}

void ManualClock::set(Micros t) { now_->store(t); }

void ManualClock::advance(Micros delta) { now_->fetch_add(delta); }

Micros ManualClock::now() const { return now_->load(); }

}  // namespace forensight
