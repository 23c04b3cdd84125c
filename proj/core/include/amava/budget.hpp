#pragma once

#include <exception>
#include <functional>
#include <future>
#include <memory>
#include <thread>
#include <variant>

#include "amava/clock.hpp"
#include "amava/errors.hpp"
#include "amava/types.hpp"

namespace amava {

template <typename T>
using Outcome = std::variant<T, BackendFailure>;

template <typename T>
bool succeeded(const Outcome<T>& o) {
  return std::holds_alternative<T>(o);
}

// Runs `fn` on a detached thread and waits at most `budget_ms` clock
// milliseconds for it. A call that overruns is abandoned: the caller gets a
// timeout failure immediately and the late result is discarded. Anything
// captured by `fn` must therefore stay alive on its own (shared ownership).
template <typename T>
Outcome<T> call_with_budget(std::function<T()> fn, Millis budget_ms, const Clock& clock) {
  auto promise = std::make_shared<std::promise<T>>();
  std::future<T> result = promise->get_future();
  std::thread([promise, fn = std::move(fn)]() mutable {
    try {
      promise->set_value(fn());
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();

  if (result.wait_for(clock.real_duration(budget_ms)) != std::future_status::ready) {
    return BackendFailure{BackendFailure::Kind::timeout,
                          "no response within " + std::to_string(budget_ms) + " ms"};
  }
  try {
    return result.get();
  } catch (const std::exception& e) {
    return BackendFailure{BackendFailure::Kind::failure, e.what()};
  } catch (...) {
    return BackendFailure{BackendFailure::Kind::failure, "unknown backend error"};
  }
}

}  // namespace amava
