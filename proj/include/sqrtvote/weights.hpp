#pragma once

// Square-root shares and k-digit rounded weight schemes.

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "model.hpp"

namespace sqrtvote {

/// sqrt(N_i) / sum_j sqrt(N_j), summed in member order. The same vector is
/// the exact weight scheme and the fairness target.
inline std::vector<double> ideal_shares(const Assembly& assembly) {
    std::vector<double> roots;
    roots.reserve(assembly.size());
    double total = 0.0;
    for (const auto& m : assembly.members()) {
        roots.push_back(std::sqrt(static_cast<double>(m.population)));
        total += roots.back();
    }
    for (auto& r : roots) r /= total;
    return roots;
}

inline WeightScheme exact_scheme(const Assembly& assembly) {
    return WeightScheme::exact(ideal_shares(assembly));
}

namespace detail {

// Half-away-from-zero rounding of x * 10^digits for a nonnegative x.
// Values within a few double ulps of a .5 tie are treated as ties: a share
// such as 4505/10000 is not representable, and its nearest double may sit
// just below the half.
inline std::int64_t round_scaled(double x, int digits) {
    long double scaled = static_cast<long double>(x);
    for (int i = 0; i < digits; ++i) scaled *= 10.0L;
    const long double floor_part = std::floor(scaled);
    const long double frac = scaled - floor_part;
    const long double window = 8.0L * static_cast<long double>(DBL_EPSILON) * scaled;
    const bool round_up = frac >= 0.5L || (0.5L - frac) <= window;
    return static_cast<std::int64_t>(floor_part) + (round_up ? 1 : 0);
}

}  // namespace detail

/// Rounds each share to `digits` decimal places. No renormalisation: the
/// rounded weights need not sum to 1.
inline WeightScheme round_scheme(std::span<const double> exact_shares, int digits) {
    if (digits < 1 || digits > kMaxDigits)
        throw Error(ErrorCode::KOutOfRange,
                    "digits " + std::to_string(digits) + " outside 1.." + std::to_string(kMaxDigits));
    std::vector<std::int64_t> units;
    units.reserve(exact_shares.size());
    for (double s : exact_shares) units.push_back(detail::round_scaled(s, digits));
    return WeightScheme::rounded(digits, std::move(units));
}

inline WeightScheme round_scheme(const WeightScheme& scheme, int digits) {
    return round_scheme(scheme.values(), digits);
}

/// Exact scheme for digits == 0, otherwise the k-digit rounding of the ideal shares.
inline WeightScheme make_scheme(const Assembly& assembly, int digits) {
    auto shares = ideal_shares(assembly);
    if (digits == 0) return WeightScheme::exact(std::move(shares));
    return round_scheme(shares, digits);
}

}  // namespace sqrtvote
