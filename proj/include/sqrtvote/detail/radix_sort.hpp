#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sqrtvote::detail {

/// Stable LSD radix sort of parallel (key, value) arrays, ordering by
/// sort_key(key) = (bias - key) & mask in ascending order, i.e. by key
/// descending when every key lies in [bias - mask, bias]. `key_bits` is the
/// bit width of mask. The scratch spans must be at least as long as keys.
inline void radix_sort_descending(std::span<std::uint64_t> keys, std::span<std::uint32_t> values,
                                  std::uint64_t bias, int key_bits, std::span<std::uint64_t> key_scratch,
                                  std::span<std::uint32_t> value_scratch) {
    constexpr int kDigitBits = 11;
    constexpr std::size_t kRadix = std::size_t{1} << kDigitBits;
    const std::size_t n = keys.size();
    if (n < 2 || key_bits <= 0) return;

    if (n <= 64) {
        // insertion sort, stable
        for (std::size_t i = 1; i < n; ++i) {
            const auto k = keys[i];
            const auto v = values[i];
            std::size_t j = i;
            for (; j > 0 && keys[j - 1] < k; --j) {
                keys[j] = keys[j - 1];
                values[j] = values[j - 1];
            }
            keys[j] = k;
            values[j] = v;
        }
        return;
    }

    const int passes = (key_bits + kDigitBits - 1) / kDigitBits;
    std::uint64_t* src_k = keys.data();
    std::uint32_t* src_v = values.data();
    std::uint64_t* dst_k = key_scratch.data();
    std::uint32_t* dst_v = value_scratch.data();
    std::vector<std::size_t> count(kRadix);

    for (int pass = 0; pass < passes; ++pass) {
        const int shift = pass * kDigitBits;
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) ++count[((bias - src_k[i]) >> shift) & (kRadix - 1)];
        std::size_t sum = 0;
        for (auto& c : count) {
            const auto t = c;
            c = sum;
            sum += t;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto pos = count[((bias - src_k[i]) >> shift) & (kRadix - 1)]++;
            dst_k[pos] = src_k[i];
            dst_v[pos] = src_v[i];
        }
        std::swap(src_k, dst_k);
        std::swap(src_v, dst_v);
    }
    if (src_k != keys.data()) {
        std::copy(src_k, src_k + n, keys.data());
        std::copy(src_v, src_v + n, values.data());
    }
}

}  // namespace sqrtvote::detail
