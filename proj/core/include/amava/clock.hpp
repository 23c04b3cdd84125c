#pragma once

#include <atomic>
#include <chrono>

#include "amava/types.hpp"

namespace amava {

// Time source for the pipeline. All pipeline timestamps are milliseconds on
// this clock; sleeps and timeout budgets are expressed on it as well.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual Millis now_ms() const = 0;
  virtual void sleep_until(Millis t) = 0;
  // Wall-clock duration corresponding to `ms` clock milliseconds.
  virtual std::chrono::nanoseconds real_duration(Millis ms) const = 0;

  void sleep_for(Millis ms) { sleep_until(now_ms() + ms); }
};

// Milliseconds since construction on std::chrono::steady_clock.
class SteadyClock : public Clock {
 public:
  SteadyClock();
  Millis now_ms() const override;
  void sleep_until(Millis t) override;
  std::chrono::nanoseconds real_duration(Millis ms) const override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

// Steady time sped up by a constant factor; a speed of 10 makes one clock
// second pass in 100 ms of wall time.
class ScaledClock : public Clock {
 public:
  explicit ScaledClock(double speed);
  Millis now_ms() const override;
  void sleep_until(Millis t) override;
  std::chrono::nanoseconds real_duration(Millis ms) const override;
  double speed() const { return speed_; }

 private:
  double speed_;
  std::chrono::steady_clock::time_point origin_;
};

// Simulated time that only moves when told to. sleep_until advances the
// clock instead of blocking, so it suits single-threaded scripted runs.
class ManualClock : public Clock {
 public:
  explicit ManualClock(Millis start = 0) : now_(start) {}
  Millis now_ms() const override { return now_.load(); }
  void sleep_until(Millis t) override;
  std::chrono::nanoseconds real_duration(Millis ms) const override;

  void set(Millis t) { now_.store(t); }
  void advance(Millis ms) { now_.fetch_add(ms); }

 private:
  std::atomic<Millis> now_;
};

}  // namespace amava
