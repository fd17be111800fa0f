#pragma once

// Exhaustive coalition enumeration and the quota sweep.
//
// build_ledger collects every coalition above half of the total weight,
// sorted by weight sum (descending). sweep_quota scans that ledger once and
// reports, for every interval of quotas R on which the set of winning
// coalitions is constant, the swing vector eta. Segments are streamed to a
// visitor in descending R order so that the 2^27-coalition case never has
// to materialise tens of millions of swing vectors.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "detail/parallel.hpp"
#include "detail/radix_sort.hpp"
#include "detail/subset_sums.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "rules.hpp"

namespace sqrtvote {

struct LedgerOptions {
    std::optional<int> member_quota;
    /// Keep only coalitions with weight sum above 0.5. When false every
    /// coalition is kept, which yields the full table down to R = 0.
    bool majority_only = true;
    /// Weight ranges sorted independently; rounded up to a power of two.
    unsigned buckets = 64;
    /// 0 picks the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

/// Interval lo < R <= hi of quotas. Rounded schemes also carry exact integer
/// endpoints in units of 10^-digits.
struct QuotaInterval {
    double lo = 0.0;
    double hi = 0.0;
    int digits = 0;
    std::int64_t lo_units = 0;
    std::int64_t hi_units = 0;

    bool contains(double r) const noexcept { return lo < r && r <= hi; }
    friend bool operator==(const QuotaInterval&, const QuotaInterval&) = default;
};

class CoalitionLedger {
public:
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t member_count() const noexcept { return n_; }
    const WeightScheme& scheme() const noexcept { return scheme_; }
    const LedgerOptions& options() const noexcept { return options_; }

    CoalitionId id(std::size_t i) const { return ids_[i]; }
    /// Order-preserving sum key: IEEE bits in exact mode, integer units otherwise.
    std::uint64_t key(std::size_t i) const { return keys_[i]; }
    double weight(std::size_t i) const { return key_value(keys_[i]); }
    std::span<const CoalitionId> ids() const noexcept { return ids_; }
    std::span<const std::uint64_t> keys() const noexcept { return keys_; }
    /// Start offsets of the weight-range buckets, plus a final end offset.
    std::span<const std::size_t> bucket_offsets() const noexcept { return bucket_offsets_; }

    double key_value(std::uint64_t k) const noexcept {
        return scheme_.is_exact() ? detail::key_double(k)
                                  : scheme_.units_to_value(static_cast<std::int64_t>(k));
    }

    /// Sums at or below this key never enter a majority-only ledger.
    std::uint64_t floor_key() const noexcept { return floor_key_; }

private:
    friend CoalitionLedger build_ledger(const Assembly&, const WeightScheme&, const LedgerOptions&);

    CoalitionLedger(const WeightScheme& scheme, std::size_t n, LedgerOptions options)
        : scheme_(scheme), n_(n), options_(options) {}

    WeightScheme scheme_;
    std::size_t n_;
    LedgerOptions options_;
    std::uint64_t floor_key_ = 0;
    std::vector<std::uint64_t> keys_;
    std::vector<CoalitionId> ids_;
    std::vector<std::size_t> bucket_offsets_;
};

namespace detail {

// Fixed partition count keeps the ledger layout independent of thread count.
inline std::size_t partition_count(const SplitLayout& layout) {
    return std::min<std::size_t>(64, layout.low_count());
}

inline std::pair<std::size_t, std::size_t> partition_range(const SplitLayout& layout, std::size_t parts,
                                                           std::size_t p) {
    const std::size_t lc = layout.low_count();
    return {lc * p / parts, lc * (p + 1) / parts};
}

inline std::vector<int> popcounts(std::size_t count) {
    std::vector<int> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::popcount(i);
    return out;
}

}  // namespace detail

inline CoalitionLedger build_ledger(const Assembly& assembly, const WeightScheme& scheme,
                                    const LedgerOptions& options = {}) {
    const std::size_t n = assembly.size();
    if (n > kMaxMembers)
        throw Error(ErrorCode::CapacityExceeded, std::to_string(n) + " members exceed the enumeration cap");
    if (scheme.size() != n) throw Error(ErrorCode::InvalidRule, "weight count differs from member count");
    if (options.member_quota && (*options.member_quota < 1 || *options.member_quota > static_cast<int>(n)))
        throw Error(ErrorCode::InvalidRule, "member quota must lie in 1..n");

    CoalitionLedger ledger(scheme, n, options);
    const detail::SubsetSums sums(scheme);
    const auto& layout = sums.layout();
    const std::size_t hc = layout.high_count();
    const auto low_pop = detail::popcounts(layout.low_count());
    const auto high_pop = detail::popcounts(hc);
    const int min_members = options.member_quota.value_or(0);

    // Keys strictly above `floor` qualify; the empty coalition's key is 0.
    std::uint64_t floor = 0;
    if (scheme.is_exact()) floor = detail::double_key(0.5);
    else floor = static_cast<std::uint64_t>(scheme.scale() / 2);
    ledger.floor_key_ = floor;
    const bool all = !options.majority_only;
    const std::uint64_t top = sums.grand_key();
    const std::uint64_t bottom = all ? 0 : floor + 1;

    unsigned bucket_bits = 0;
    while ((1u << bucket_bits) < std::max(1u, options.buckets)) ++bucket_bits;
    const std::uint64_t span_width = top >= bottom ? top - bottom : 0;
    const int range_bits = std::bit_width(span_width);
    const int shift = std::max(0, range_bits - static_cast<int>(bucket_bits));
    const std::size_t bucket_count = top >= bottom ? ((span_width >> shift) + 1) : 1;
    auto bucket_of = [&](std::uint64_t key) { return static_cast<std::size_t>((top - key) >> shift); };
    auto qualifies = [&](std::uint64_t key, std::size_t a, std::size_t h) {
        return (all || key > floor) && low_pop[a] + high_pop[h] >= min_members;
    };

    const std::size_t parts = detail::partition_count(layout);
    std::vector<std::size_t> counts(parts * bucket_count, 0);

    detail::run_partitions(parts, options.threads, [&](std::size_t p) {
        std::vector<std::uint64_t> keys(hc);
        std::vector<double> scratch(hc);
        auto* row = counts.data() + p * bucket_count;
        const auto [a0, a1] = detail::partition_range(layout, parts, p);
        for (std::size_t a = a0; a < a1; ++a) {
            sums.fill_block(a, keys, scratch);
            for (std::size_t h = 0; h < hc; ++h)
                if (qualifies(keys[h], a, h)) ++row[bucket_of(keys[h])];
        }
    });

    // Bucket-major layout; inside a bucket, partitions in order.
    std::vector<std::size_t> cursor(parts * bucket_count);
    ledger.bucket_offsets_.assign(bucket_count + 1, 0);
    std::size_t total = 0;
    for (std::size_t b = 0; b < bucket_count; ++b) {
        ledger.bucket_offsets_[b] = total;
        for (std::size_t p = 0; p < parts; ++p) {
            cursor[p * bucket_count + b] = total;
            total += counts[p * bucket_count + b];
        }
    }
    ledger.bucket_offsets_[bucket_count] = total;
    ledger.keys_.resize(total);
    ledger.ids_.resize(total);

    detail::run_partitions(parts, options.threads, [&](std::size_t p) {
        std::vector<std::uint64_t> keys(hc);
        std::vector<double> scratch(hc);
        auto* pos = cursor.data() + p * bucket_count;
        const auto [a0, a1] = detail::partition_range(layout, parts, p);
        for (std::size_t a = a0; a < a1; ++a) {
            sums.fill_block(a, keys, scratch);
            for (std::size_t h = 0; h < hc; ++h) {
                if (!qualifies(keys[h], a, h)) continue;
                const auto at = pos[bucket_of(keys[h])]++;
                ledger.keys_[at] = keys[h];
                ledger.ids_[at] = layout.id(a, h);
            }
        }
    });

    std::size_t largest = 0;
    for (std::size_t b = 0; b < bucket_count; ++b)
        largest = std::max(largest, ledger.bucket_offsets_[b + 1] - ledger.bucket_offsets_[b]);
    std::vector<std::size_t> bucket_list(bucket_count);
    for (std::size_t b = 0; b < bucket_count; ++b) bucket_list[b] = b;

    // Each worker sorts whole buckets with its own scratch.
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(detail::resolve_threads(options.threads), std::max<std::size_t>(1, bucket_count)));
    std::vector<std::vector<std::uint64_t>> key_scratch(workers);
    std::vector<std::vector<CoalitionId>> id_scratch(workers);
    const std::size_t stride = (bucket_count + workers - 1) / workers;
    detail::run_partitions(workers, workers, [&](std::size_t w) {
        key_scratch[w].resize(largest);
        id_scratch[w].resize(largest);
        for (std::size_t b = w * stride; b < std::min(bucket_count, (w + 1) * stride); ++b) {
            const auto lo = ledger.bucket_offsets_[b], hi = ledger.bucket_offsets_[b + 1];
            detail::radix_sort_descending(std::span(ledger.keys_).subspan(lo, hi - lo),
                                          std::span(ledger.ids_).subspan(lo, hi - lo), top, shift,
                                          key_scratch[w], id_scratch[w]);
        }
    });
    return ledger;
}

/// Streaming view of one quota segment. `eta` is only valid during the callback.
struct SegmentView {
    QuotaInterval interval;
    std::uint64_t omega = 0;
    std::span<const std::uint64_t> eta;
};

/// Calls visit(const SegmentView&) for every segment of the winning-set
/// function, from the highest quotas down. Within a segment the winning set
/// is {C : sum_C >= R}; the topmost segment ends at the grand coalition's sum.
template <class Visitor>
void sweep_quota(const CoalitionLedger& ledger, Visitor&& visit) {
    if (ledger.empty()) throw Error(ErrorCode::EmptyLedger, "no coalition qualifies for the ledger");
    const std::size_t n = ledger.member_count();
    const auto keys = ledger.keys();
    const auto ids = ledger.ids();
    const std::size_t total = keys.size();
    const bool rounded = !ledger.scheme().is_exact();
    const bool majority = ledger.options().majority_only;

    std::vector<std::uint64_t> omega_i(n, 0), eta(n, 0);
    std::uint64_t omega = 0;

    auto make_interval = [&](std::uint64_t lo_key, std::uint64_t hi_key) {
        QuotaInterval iv;
        iv.lo = ledger.key_value(lo_key);
        iv.hi = ledger.key_value(hi_key);
        if (rounded) {
            iv.digits = ledger.scheme().digits();
            iv.lo_units = static_cast<std::int64_t>(lo_key);
            iv.hi_units = static_cast<std::int64_t>(hi_key);
        }
        return iv;
    };

    std::size_t i = 0;
    while (i < total) {
        const std::uint64_t key = keys[i];
        std::size_t j = i;
        for (; j < total && keys[j] == key; ++j) {
            ++omega;
            for (auto m = ids[j]; m; m &= m - 1) ++omega_i[std::countr_zero(m)];
        }
        std::uint64_t lo_key;
        if (j < total) lo_key = keys[j];
        else if (majority) lo_key = ledger.floor_key();
        else lo_key = 0;
        if (lo_key < key) {
            for (std::size_t m = 0; m < n; ++m) eta[m] = 2 * omega_i[m] - omega;
            visit(SegmentView{make_interval(lo_key, key), omega, eta});
        }
        i = j;
    }
}

struct CurveSegment {
    QuotaInterval interval;
    SwingVector swings;
};

/// Materialised list of segments, highest quotas first.
using PiecewiseCurve = std::vector<CurveSegment>;

inline PiecewiseCurve collect_curve(const CoalitionLedger& ledger) {
    PiecewiseCurve curve;
    sweep_quota(ledger, [&](const SegmentView& s) {
        curve.push_back({s.interval, SwingVector::from_eta(s.omega, {s.eta.begin(), s.eta.end()})});
    });
    return curve;
}

struct SigmaSegment {
    QuotaInterval interval;
    double sigma = 0.0;
    std::uint64_t omega = 0;
};

inline std::vector<SigmaSegment> sigma_of_curve(const PiecewiseCurve& curve, std::span<const double> ideal) {
    std::vector<SigmaSegment> out;
    out.reserve(curve.size());
    for (const auto& seg : curve)
        out.push_back({seg.interval, sigma_from_eta(seg.swings.eta(), ideal), seg.swings.omega()});
    return out;
}

namespace detail {

// Restricts an interval to (0.5, 1]. Returns false if nothing is left.
inline bool clip_to_majority(QuotaInterval& iv) {
    if (iv.hi <= 0.5 || iv.lo >= 1.0) return false;
    if (iv.lo < 0.5) {
        iv.lo = 0.5;
        if (iv.digits > 0) {
            std::int64_t s = 1;
            for (int d = 0; d < iv.digits; ++d) s *= 10;
            iv.lo_units = s / 2;
        }
    }
    if (iv.hi > 1.0) {
        iv.hi = 1.0;
        if (iv.digits > 0) {
            std::int64_t s = 1;
            for (int d = 0; d < iv.digits; ++d) s *= 10;
            iv.hi_units = s;
        }
    }
    return true;
}

}  // namespace detail

struct MinSigma {
    double sigma = 0.0;
    /// Every interval attaining sigma, ascending in lo.
    std::vector<QuotaInterval> intervals;
    /// Swing vector on the lowest-R attaining interval.
    SwingVector swings;

    const QuotaInterval& canonical() const { return intervals.front(); }
};

/// Streaming minimum search over segments restricted to R in (0.5, 1].
/// Ties are exact floating-point equality.
class MinSigmaSearch {
public:
    explicit MinSigmaSearch(std::span<const double> ideal) : ideal_(ideal.begin(), ideal.end()) {}

    void operator()(const SegmentView& s) { offer(s.interval, sigma_from_eta(s.eta, ideal_), s.omega, s.eta); }

    void offer(QuotaInterval iv, double value, std::uint64_t omega, std::span<const std::uint64_t> eta) {
        if (!detail::clip_to_majority(iv)) return;
        if (!found_ || value < best_.sigma) {
            found_ = true;
            best_.sigma = value;
            best_.intervals.clear();
        } else if (value > best_.sigma) {
            return;
        }
        best_.intervals.push_back(iv);
        // Segments arrive in descending R, so the latest tie is the lowest.
        best_.swings = SwingVector::from_eta(omega, {eta.begin(), eta.end()});
    }

    bool found() const noexcept { return found_; }

    MinSigma result() const {
        MinSigma r = best_;
        std::sort(r.intervals.begin(), r.intervals.end(),
                  [](const QuotaInterval& x, const QuotaInterval& y) { return x.lo < y.lo; });
        return r;
    }

private:
    std::vector<double> ideal_;
    bool found_ = false;
    MinSigma best_;
};

/// Smallest sigma over the segments inside (0.5, 1] and all intervals attaining it.
inline std::optional<MinSigma> find_min_sigma(std::span<const SigmaSegment> segments,
                                              const PiecewiseCurve* curve = nullptr) {
    MinSigmaSearch search(std::span<const double>{});
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        std::span<const std::uint64_t> eta;
        if (curve) eta = (*curve)[k].swings.eta();
        search.offer(s.interval, s.sigma, s.omega, eta);
    }
    if (!search.found()) return std::nullopt;
    return search.result();
}

/// Sweep and minimise in one streaming pass.
inline std::optional<MinSigma> min_sigma(const CoalitionLedger& ledger, std::span<const double> ideal) {
    MinSigmaSearch search(ideal);
    sweep_quota(ledger, search);
    if (!search.found()) return std::nullopt;
    return search.result();
}

struct EvaluateOptions {
    unsigned threads = 0;
};

namespace detail {

// Counts winners of `wins(a, h)` over all coalitions and derives omega_i
// from per-low-mask and per-high-mask win tallies.
template <class BlockEval>
SwingVector count_swings(const SplitLayout& layout, std::size_t n, unsigned threads, BlockEval&& eval_block) {
    const std::size_t hc = layout.high_count();
    const std::size_t parts = partition_count(layout);
    std::vector<std::uint64_t> wins_low(layout.low_count(), 0);
    std::vector<std::vector<std::uint64_t>> wins_high(parts);

    run_partitions(parts, threads, [&](std::size_t p) {
        auto& high = wins_high[p];
        high.assign(hc, 0);
        const auto [a0, a1] = partition_range(layout, parts, p);
        for (std::size_t a = a0; a < a1; ++a) wins_low[a] = eval_block(a, std::span<std::uint64_t>(high));
    });

    std::vector<std::uint64_t> omega_i(n, 0);
    std::uint64_t omega = 0;
    const auto lb = static_cast<std::size_t>(layout.low_bits);
    for (std::size_t a = 0; a < wins_low.size(); ++a) {
        omega += wins_low[a];
        for (auto m = a; m; m &= m - 1) omega_i[std::countr_zero(m)] += wins_low[a];
    }
    for (std::size_t h = 0; h < hc; ++h) {
        std::uint64_t w = 0;
        for (std::size_t p = 0; p < parts; ++p) w += wins_high[p][h];
        for (auto m = h; m; m &= m - 1) omega_i[lb + std::countr_zero(m)] += w;
    }
    return SwingVector(omega, omega_i);
}

// Smallest key whose value reaches the quota.
inline std::uint64_t quota_key(const WeightScheme& scheme, double quota) {
    if (scheme.is_exact()) return double_key(quota);
    auto u = static_cast<std::int64_t>(std::ceil(quota * static_cast<double>(scheme.scale())));
    while (u > 0 && scheme.units_to_value(u - 1) >= quota) --u;
    while (scheme.units_to_value(u) < quota) ++u;
    return static_cast<std::uint64_t>(u);
}

}  // namespace detail

/// One pass over all 2^n coalitions under the rule's predicate.
inline SwingVector evaluate_rule(const Assembly& assembly, const RuleDescriptor& rule,
                                 const EvaluateOptions& options = {}) {
    const std::size_t n = assembly.size();
    if (n > kMaxMembers)
        throw Error(ErrorCode::CapacityExceeded, std::to_string(n) + " members exceed the enumeration cap");
    validate_rule(assembly, rule);
    const detail::SplitLayout layout(n);
    const std::size_t hc = layout.high_count();
    const auto low_pop = detail::popcounts(layout.low_count());
    const auto high_pop = detail::popcounts(hc);

    std::vector<std::int64_t> populations;
    for (const auto& m : assembly.members()) populations.push_back(m.population);
    const detail::SplitTable pop(layout, populations);

    return std::visit(
        [&](const auto& r) -> SwingVector {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WeightedQuotaRule>) {
                const detail::SubsetSums sums(r.scheme);
                const auto threshold = detail::quota_key(r.scheme, r.quota);
                const int m = r.member_quota.value_or(0);
                return detail::count_swings(layout, n, options.threads, [&](std::size_t a, std::span<std::uint64_t> high) {
                    thread_local std::vector<std::uint64_t> keys;
                    thread_local std::vector<double> scratch;
                    keys.resize(hc);
                    scratch.resize(hc);
                    sums.fill_block(a, keys, scratch);
                    std::uint64_t wins = 0;
                    for (std::size_t h = 0; h < hc; ++h) {
                        if (keys[h] >= threshold && low_pop[a] + high_pop[h] >= m) {
                            ++wins;
                            ++high[h];
                        }
                    }
                    return wins;
                });
            } else if constexpr (std::is_same_v<T, NiceRule>) {
                const auto params = resolve(assembly, r);
                const detail::SplitTable votes(layout, r.votes);
                const std::int64_t min_pop =
                    params.population_threshold ? params.population_threshold->ceil_of(params.total_population) : 0;
                return detail::count_swings(layout, n, options.threads, [&](std::size_t a, std::span<std::uint64_t> high) {
                    const auto va = votes.low[a];
                    const auto pa = pop.low[a];
                    const int ca = low_pop[a];
                    std::uint64_t wins = 0;
                    for (std::size_t h = 0; h < hc; ++h) {
                        if (va + votes.high[h] >= params.vote_threshold && ca + high_pop[h] >= params.member_threshold &&
                            pa + pop.high[h] >= min_pop) {
                            ++wins;
                            ++high[h];
                        }
                    }
                    return wins;
                });
            } else {
                const auto params = resolve(assembly, r);
                const std::int64_t min_pop = params.population_fraction.ceil_of(params.total_population);
                return detail::count_swings(layout, n, options.threads, [&](std::size_t a, std::span<std::uint64_t> high) {
                    const auto pa = pop.low[a];
                    const int ca = low_pop[a];
                    std::uint64_t wins = 0;
                    for (std::size_t h = 0; h < hc; ++h) {
                        if (ca + high_pop[h] >= params.member_threshold && pa + pop.high[h] >= min_pop) {
                            ++wins;
                            ++high[h];
                        }
                    }
                    return wins;
                });
            }
        },
        rule);
}

}  // namespace sqrtvote
