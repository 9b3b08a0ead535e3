#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>

namespace linkrec {

// Exponential backoff for transport-level failures.
struct RetryPolicy {
  // Total attempts, including the first call.
  unsigned max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  std::chrono::milliseconds max_delay{8000};
  double multiplier = 2.0;

  // Delay before retry number `retry` (1-based).
  std::chrono::milliseconds delay_before(unsigned retry) const {
    const double raw = static_cast<double>(initial_delay.count()) * std::pow(multiplier, retry - 1.0);
    return std::chrono::milliseconds(
        static_cast<long long>(std::min(raw, static_cast<double>(max_delay.count()))));
  }
};

}  // namespace linkrec
