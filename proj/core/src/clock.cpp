#include "amava/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace amava {

namespace {

using std::chrono::duration_cast;
using std::chrono::milliseconds;
using std::chrono::nanoseconds;
using std::chrono::steady_clock;

}  // namespace

SteadyClock::SteadyClock() : origin_(steady_clock::now()) {}

Millis SteadyClock::now_ms() const {
  return duration_cast<milliseconds>(steady_clock::now() - origin_).count();
}

void SteadyClock::sleep_until(Millis t) { std::this_thread::sleep_until(origin_ + milliseconds(t)); }

nanoseconds SteadyClock::real_duration(Millis ms) const { return milliseconds(ms); }

ScaledClock::ScaledClock(double speed) : speed_(speed), origin_(steady_clock::now()) {
  if (!(speed > 0.0)) throw std::invalid_argument("ScaledClock speed must be positive");
}

Millis ScaledClock::now_ms() const {
  const auto real = duration_cast<nanoseconds>(steady_clock::now() - origin_).count();
  return static_cast<Millis>(std::floor(static_cast<double>(real) * speed_ / 1e6));
}

void ScaledClock::sleep_until(Millis t) {
  const auto offset = nanoseconds(static_cast<std::int64_t>(std::ceil(static_cast<double>(t) * 1e6 / speed_)));
  std::this_thread::sleep_until(origin_ + offset);
}

nanoseconds ScaledClock::real_duration(Millis ms) const {
  return nanoseconds(static_cast<std::int64_t>(std::ceil(static_cast<double>(ms) * 1e6 / speed_)));
}

void ManualClock::sleep_until(Millis t) {
  Millis current = now_.load();
  while (current < t && !now_.compare_exchange_weak(current, t)) {
  }
}

nanoseconds ManualClock::real_duration(Millis ms) const { return milliseconds(ms); }

}  // namespace amava
