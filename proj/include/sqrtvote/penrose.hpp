#pragma once

// Probability that a single voter decides a simple-majority vote among N
// voters when everyone else votes at random.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "model.hpp"

namespace sqrtvote::penrose {

/// Largest N evaluated by exact integer arithmetic.
inline constexpr std::uint64_t kExactLimit = 64;

namespace detail {

inline void check(std::uint64_t voters) {
    if (voters < 1) throw Error(ErrorCode::NOutOfRange, "need at least one voter");
}

// Odd N needs the other N-1 votes split evenly; even N needs one extra
// "yes" among them. Both reduce to C(2m, m) / 4^m with m = floor(N / 2).
inline std::uint64_t half_index(std::uint64_t voters) { return voters / 2; }

}  // namespace detail

/// C(N-1, floor(N/2)) / 2^(N-1) by exact integer binomial, N <= 64.
inline double decisiveness_exact(std::uint64_t voters) {
    detail::check(voters);
    if (voters > kExactLimit) throw Error(ErrorCode::NOutOfRange, "exact path limited to N <= 64");
    const std::uint64_t top = voters - 1;
    const std::uint64_t k = voters % 2 == 1 ? top / 2 : voters / 2;
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) c = c * (top - k + i) / i;
    return std::ldexp(static_cast<double>(c), -static_cast<int>(top));
}

/// Same probability in the log domain: lgamma for moderate N, the
/// asymptotic series of log(C(2m,m)/4^m) once m >= 1000.
inline double decisiveness_log(std::uint64_t voters) {
    detail::check(voters);
    const std::uint64_t m = detail::half_index(voters);
    if (m == 0) return 1.0;
    const double md = static_cast<double>(m);
    double log_p;
    if (m < 1000) {
        log_p = std::lgamma(2.0 * md + 1.0) - 2.0 * std::lgamma(md + 1.0) - 2.0 * md * std::numbers::ln2;
    } else {
        const double inv = 1.0 / md;
        const double inv2 = inv * inv;
        log_p = -0.5 * std::log(std::numbers::pi * md) - inv / 8.0 + inv * inv2 / 192.0 -
                inv * inv2 * inv2 / 640.0 + 17.0 * inv * inv2 * inv2 * inv2 / 14336.0;
    }
    return std::exp(log_p);
}

inline double decisiveness(std::uint64_t voters) {
    return voters <= kExactLimit ? decisiveness_exact(voters) : decisiveness_log(voters);
}

/// sqrt(2 / (pi N)), the large-N behaviour behind the square root law.
inline double decisiveness_asymptotic(std::uint64_t voters) {
    detail::check(voters);
    return std::sqrt(2.0 / (std::numbers::pi * static_cast<double>(voters)));
}

}  // namespace sqrtvote::penrose
