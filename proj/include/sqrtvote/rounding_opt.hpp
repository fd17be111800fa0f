#pragma once

// Sweep over rounding precisions: for each k the optimal quota and its sigma,
// plus the full-precision baseline.

#include <functional>
#include <optional>
#include <vector>

#include "engine.hpp"
#include "metrics.hpp"
#include "weights.hpp"

namespace sqrtvote {

struct RoundingSweepRow {
    /// nullopt for the full-precision row.
    std::optional<int> digits;
    double sigma_min = 0.0;
    std::vector<QuotaInterval> intervals;
    /// Efficiency on the canonical (lowest-R) optimal interval.
    double efficiency = 0.0;
    SwingVector swings;

    const QuotaInterval& canonical() const { return intervals.front(); }
};

struct RoundingSweep {
    /// k = 1..k_max in order, then the full-precision row.
    std::vector<RoundingSweepRow> rows;
    std::size_t best = 0;

    const RoundingSweepRow& best_row() const { return rows[best]; }
    const RoundingSweepRow& exact_row() const { return rows.back(); }
};

struct RoundingOptions {
    std::optional<int> member_quota;
    unsigned threads = 0;
    /// Called after each row; useful for progress output on large assemblies.
    std::function<void(const RoundingSweepRow&)> on_row;
};

/// Optimal quota for one scheme: ledger, sweep and minimum in one go.
/// Returns nullopt when no quota in (0.5, 1] lets any coalition win.
inline std::optional<RoundingSweepRow> optimize_scheme(const Assembly& assembly, const WeightScheme& scheme,
                                                       std::span<const double> ideal,
                                                       std::optional<int> member_quota, unsigned threads = 0) {
    LedgerOptions lo;
    lo.member_quota = member_quota;
    lo.threads = threads;
    const auto ledger = build_ledger(assembly, scheme, lo);
    if (ledger.empty()) return std::nullopt;
    const auto best = min_sigma(ledger, ideal);
    if (!best) return std::nullopt;
    RoundingSweepRow row;
    if (!scheme.is_exact()) row.digits = scheme.digits();
    row.sigma_min = best->sigma;
    row.intervals = best->intervals;
    row.swings = best->swings;
    row.efficiency = efficiency(best->swings.omega(), assembly.size());
    return row;
}

/// Runs k = 1..k_max and the full-precision scheme. The best row has the
/// smallest sigma_min; ties go to the smallest k, the exact row last.
/// Precisions for which no coalition can win are skipped.
inline RoundingSweep optimize_rounding(const Assembly& assembly, int k_max, const RoundingOptions& options = {}) {
    if (k_max < 1 || k_max > kMaxDigits)
        throw Error(ErrorCode::KOutOfRange, "k_max must lie in 1.." + std::to_string(kMaxDigits));
    const auto ideal = ideal_shares(assembly);
    RoundingSweep sweep;
    auto run = [&](const WeightScheme& scheme) {
        auto row = optimize_scheme(assembly, scheme, ideal, options.member_quota, options.threads);
        if (!row) return;
        if (options.on_row) options.on_row(*row);
        sweep.rows.push_back(std::move(*row));
    };
    for (int k = 1; k <= k_max; ++k) run(round_scheme(ideal, k));
    run(WeightScheme::exact(ideal));
    if (sweep.rows.empty()) throw Error(ErrorCode::EmptyLedger, "no scheme admits a winning coalition");
    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
        if (sweep.rows[i].sigma_min < sweep.rows[sweep.best].sigma_min) sweep.best = i;
    return sweep;
}

}  // namespace sqrtvote
