#pragma once

// Weight sums for all 2^n coalitions, produced one block at a time.
//
// Members are split into a low half (bits 0..L-1) and a high half. A block
// is one fixed low mask `a` together with every high mask `h`; coalition id
// is a | (h << L). Sums come out as order-preserving 64-bit keys:
//   * Exact mode: the IEEE bit pattern of the double sum. Sums are folded in
//     ascending member order starting from 0.0, so every coalition gets the
//     same value as adding its weights one by one from the lowest index.
//   * Rounded mode: the integer sum in units of 10^-k.

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "../model.hpp"

namespace sqrtvote::detail {

struct SplitLayout {
    int low_bits = 0;
    int high_bits = 0;

    explicit SplitLayout(std::size_t n)
        : low_bits(static_cast<int>(n / 2)), high_bits(static_cast<int>(n - n / 2)) {}

    std::size_t low_count() const noexcept { return std::size_t{1} << low_bits; }
    std::size_t high_count() const noexcept { return std::size_t{1} << high_bits; }
    CoalitionId id(std::size_t a, std::size_t h) const noexcept {
        return static_cast<CoalitionId>(a | (h << low_bits));
    }
};

inline std::uint64_t double_key(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }
inline double key_double(std::uint64_t k) noexcept { return std::bit_cast<double>(k); }

/// Table of subset sums of `w` in ascending fold order: out[t | 1<<j] = out[t] + w[j].
template <class T>
void fill_subset_table(T base, std::span<const T> w, std::span<T> out) {
    out[0] = base;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const std::size_t half = std::size_t{1} << j;
        const T wj = w[j];
        for (std::size_t t = 0; t < half; ++t) out[t | half] = out[t] + wj;
    }
}

/// Per-member integer quantity summed over each half, for split enumeration.
struct SplitTable {
    std::vector<std::int64_t> low;
    std::vector<std::int64_t> high;

    SplitTable() = default;
    SplitTable(const SplitLayout& layout, std::span<const std::int64_t> per_member)
        : low(layout.low_count()), high(layout.high_count()) {
        const auto lb = static_cast<std::size_t>(layout.low_bits);
        fill_subset_table<std::int64_t>(0, per_member.subspan(0, lb), low);
        fill_subset_table<std::int64_t>(0, per_member.subspan(lb), high);
    }
};

class SubsetSums {
public:
    explicit SubsetSums(const WeightScheme& scheme) : layout_(scheme.size()), exact_(scheme.is_exact()) {
        const auto lb = static_cast<std::size_t>(layout_.low_bits);
        if (exact_) {
            weights_.assign(scheme.values().begin(), scheme.values().end());
            low_sums_.resize(layout_.low_count());
            fill_subset_table<double>(0.0, std::span<const double>(weights_).subspan(0, lb), low_sums_);
        } else {
            units_ = SplitTable(layout_, scheme.units());
        }
    }

    const SplitLayout& layout() const noexcept { return layout_; }

    /// Writes the key of coalition a | (h << L) into keys[h] for every h.
    /// `scratch` must hold high_count() doubles in exact mode.
    void fill_block(std::size_t a, std::span<std::uint64_t> keys, std::span<double> scratch) const {
        const std::size_t hc = layout_.high_count();
        if (exact_) {
            const auto lb = static_cast<std::size_t>(layout_.low_bits);
            fill_subset_table<double>(low_sums_[a], std::span<const double>(weights_).subspan(lb),
                                      scratch.subspan(0, hc));
            for (std::size_t h = 0; h < hc; ++h) keys[h] = double_key(scratch[h]);
        } else {
            const auto base = units_.low[a];
            for (std::size_t h = 0; h < hc; ++h) keys[h] = static_cast<std::uint64_t>(base + units_.high[h]);
        }
    }

    /// Key of the grand coalition, the largest sum.
    std::uint64_t grand_key() const {
        std::vector<std::uint64_t> keys(layout_.high_count());
        std::vector<double> scratch(layout_.high_count());
        fill_block(layout_.low_count() - 1, keys, scratch);
        return keys.back();
    }

private:
    SplitLayout layout_;
    bool exact_;
    std::vector<double> weights_;
    std::vector<double> low_sums_;
    SplitTable units_;
};

}  // namespace sqrtvote::detail
