#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "model.hpp"

namespace sqrtvote {

/// B_i = eta_i / 2^(n-1).
inline std::vector<double> banzhaf_absolute(const SwingVector& swings, std::size_t n) {
    const double denom = std::ldexp(1.0, static_cast<int>(n) - 1);
    std::vector<double> out;
    out.reserve(swings.size());
    for (auto e : swings.eta()) out.push_back(static_cast<double>(e) / denom);
    return out;
}

/// beta_i = eta_i / sum_j eta_j.
inline std::vector<double> banzhaf_relative(std::span<const std::uint64_t> eta) {
    std::uint64_t total = 0;
    for (auto e : eta) total += e;
    if (total == 0) throw Error(ErrorCode::AllZeroSwings, "no member is ever critical");
    const double denom = static_cast<double>(total);
    std::vector<double> out;
    out.reserve(eta.size());
    for (auto e : eta) out.push_back(static_cast<double>(e) / denom);
    return out;
}

inline std::vector<double> banzhaf_relative(const SwingVector& swings) {
    return banzhaf_relative(swings.eta());
}

/// r_i = beta_i / ideal_i; 1 everywhere for a Penrose-fair rule.
inline std::vector<double> fairness_ratio(std::span<const double> beta, std::span<const double> ideal) {
    std::vector<double> out;
    out.reserve(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) out.push_back(beta[i] / ideal[i]);
    return out;
}

/// Root-mean-square distance between relative power and the ideal shares.
inline double sigma(std::span<const double> beta, std::span<const double> ideal) {
    double acc = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        const double d = ideal[i] - beta[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(beta.size()));
}

/// sigma straight from swing counts, without allocating. Same arithmetic as
/// sigma(banzhaf_relative(eta), ideal), so results are bit-identical.
inline double sigma_from_eta(std::span<const std::uint64_t> eta, std::span<const double> ideal) {
    std::uint64_t total = 0;
    for (auto e : eta) total += e;
    if (total == 0) throw Error(ErrorCode::DegenerateSegment, "sum of swings is zero");
    const double denom = static_cast<double>(total);
    double acc = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double d = ideal[i] - static_cast<double>(eta[i]) / denom;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(eta.size()));
}

/// Coleman efficiency: the share of all 2^n coalitions that win.
inline double efficiency(std::uint64_t omega, std::size_t n) {
    return std::ldexp(static_cast<double>(omega), -static_cast<int>(n));
}

struct PowerReport {
    std::vector<std::string> members;
    std::vector<double> weights;
    std::vector<double> banzhaf_abs;
    std::vector<double> banzhaf_rel;
    std::vector<double> ratio;
    double sigma = 0.0;
    double efficiency = 0.0;
    std::uint64_t omega = 0;
    std::string rule;
};

/// Assembles the per-member and scalar metrics of one rule. `weights` is
/// whatever the rule assigns per member (shares, rounded weights or votes).
inline PowerReport make_power_report(const Assembly& assembly, const SwingVector& swings,
                                     std::span<const double> ideal, std::span<const double> weights,
                                     std::string rule_label) {
    PowerReport r;
    for (const auto& m : assembly.members()) r.members.push_back(m.name);
    r.weights.assign(weights.begin(), weights.end());
    r.banzhaf_abs = banzhaf_absolute(swings, assembly.size());
    r.banzhaf_rel = banzhaf_relative(swings);
    r.ratio = fairness_ratio(r.banzhaf_rel, ideal);
    r.sigma = sigma(r.banzhaf_rel, ideal);
    r.omega = swings.omega();
    r.efficiency = efficiency(swings.omega(), assembly.size());
    r.rule = std::move(rule_label);
    return r;
}

}  // namespace sqrtvote
