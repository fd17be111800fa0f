#pragma once

// Treaty-rule predicates over coalition aggregates.

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace sqrtvote {

struct CoalitionAggregates {
    /// Scheme weight as a fraction of the total (rounded weights in Rounded mode).
    double weight_sum = 0.0;
    std::int64_t vote_sum = 0;
    int member_count = 0;
    Population population_sum = 0;

    friend bool operator==(const CoalitionAggregates&, const CoalitionAggregates&) = default;
};

/// Nice thresholds after defaults have been resolved against an assembly.
struct NiceParams {
    std::int64_t vote_threshold = 255;
    int member_threshold = 14;
    std::optional<Fraction> population_threshold;
    Population total_population = 0;
};

struct DoubleMajorityParams {
    int member_threshold = 15;
    Fraction population_fraction{65, 100};
    Population total_population = 0;
};

inline NiceParams resolve(const Assembly& assembly, const NiceRule& rule) {
    NiceParams p;
    p.vote_threshold = rule.vote_threshold;
    p.member_threshold = rule.member_threshold.value_or(static_cast<int>(assembly.size() / 2 + 1));
    p.population_threshold = rule.population_threshold;
    p.total_population = assembly.total_population();
    return p;
}

/// Member fractions convert by ceiling: 55% of 27 is 15, 72% of 27 is 20.
inline DoubleMajorityParams resolve(const Assembly& assembly, const DoubleMajorityRule& rule) {
    DoubleMajorityParams p;
    p.member_threshold =
        static_cast<int>(rule.member_fraction.ceil_of(static_cast<std::int64_t>(assembly.size())));
    p.population_fraction = rule.population_fraction;
    p.total_population = assembly.total_population();
    return p;
}

inline bool nice_predicate(const CoalitionAggregates& a, const NiceParams& p) noexcept {
    if (a.vote_sum < p.vote_threshold || a.member_count < p.member_threshold) return false;
    return !p.population_threshold || p.population_threshold->reached_by(a.population_sum, p.total_population);
}

inline bool double_majority_predicate(const CoalitionAggregates& a, const DoubleMajorityParams& p) noexcept {
    return a.member_count >= p.member_threshold &&
           p.population_fraction.reached_by(a.population_sum, p.total_population);
}

/// Weak inequality: a coalition reaching exactly the quota wins.
inline bool weighted_quota_predicate(const CoalitionAggregates& a, double quota,
                                     std::optional<int> member_quota) noexcept {
    return a.weight_sum >= quota && (!member_quota || a.member_count >= *member_quota);
}

/// Weight sum of a coalition, added in ascending member order. In Rounded
/// mode the sum is exact in integer units before conversion.
inline double coalition_weight(const WeightScheme& scheme, CoalitionId c) {
    if (scheme.is_exact()) {
        double s = 0.0;
        for (auto m = c; m; m &= m - 1) s += scheme.values()[std::countr_zero(m)];
        return s;
    }
    std::int64_t u = 0;
    for (auto m = c; m; m &= m - 1) u += scheme.units()[std::countr_zero(m)];
    return scheme.units_to_value(u);
}

/// Aggregates recomputed from scratch; the enumeration paths in engine.hpp
/// build the same values incrementally. `scheme` and `votes` may be absent.
inline CoalitionAggregates aggregates_of(const Assembly& assembly, CoalitionId c,
                                         const WeightScheme* scheme = nullptr,
                                         std::span<const std::int64_t> votes = {}) {
    CoalitionAggregates a;
    a.member_count = std::popcount(c);
    for (auto m = c; m; m &= m - 1) {
        const auto i = static_cast<std::size_t>(std::countr_zero(m));
        a.population_sum += assembly[i].population;
        if (!votes.empty()) a.vote_sum += votes[i];
    }
    if (scheme) a.weight_sum = coalition_weight(*scheme, c);
    return a;
}

/// Winning test for any rule descriptor, evaluated from scratch. Slow; used
/// by oracles and spot checks rather than full enumeration.
inline bool is_winning(const Assembly& assembly, const RuleDescriptor& rule, CoalitionId c) {
    return std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WeightedQuotaRule>) {
                return weighted_quota_predicate(aggregates_of(assembly, c, &r.scheme), r.quota, r.member_quota);
            } else if constexpr (std::is_same_v<T, NiceRule>) {
                return nice_predicate(aggregates_of(assembly, c, nullptr, r.votes), resolve(assembly, r));
            } else {
                return double_majority_predicate(aggregates_of(assembly, c), resolve(assembly, r));
            }
        },
        rule);
}

inline std::string describe(const RuleDescriptor& rule) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WeightedQuotaRule>) {
                std::string s = "weighted-quota";
                s += r.scheme.is_exact() ? " exact" : " " + std::to_string(r.scheme.digits()) + "-digit";
                if (r.member_quota) s += " m=" + std::to_string(*r.member_quota);
                return s;
            } else if constexpr (std::is_same_v<T, NiceRule>) {
                return r.population_threshold ? "nice" : "nice (no population clause)";
            } else {
                return "double-majority";
            }
        },
        rule);
}

}  // namespace sqrtvote
