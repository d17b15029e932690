#pragma once

#include <chrono>
#include <thread>
#include <utility>

#include "litmine/errors.hpp"

namespace litmine {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
};

/// Runs `fn`, retrying on TransportError with exponential backoff. The last
/// failure propagates.
template<class Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn())
{
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const TransportError&) {
            if (attempt >= policy.attempts) {
                throw;
            }
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * policy.multiplier));
    }
}

} // namespace litmine
