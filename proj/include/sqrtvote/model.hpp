#pragma once

// Domain types shared by every part of the library: member states, the
// assembly that fixes bit positions for coalition masks, weight schemes,
// rule descriptors and swing vectors.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace sqrtvote {

enum class ErrorCode {
    EmptyAssembly,
    TooManyMembers,
    NonPositivePopulation,
    DuplicateName,
    KOutOfRange,
    CapacityExceeded,
    EmptyLedger,
    DegenerateSegment,
    AllZeroSwings,
    NOutOfRange,
    InvalidRule,
    ParseError,
    InvalidPopulation,
    MissingVotesColumn,
    UnknownFixture,
    IoError,
};

inline const char* to_string(ErrorCode c) noexcept {
    switch (c) {
    case ErrorCode::EmptyAssembly: return "EmptyAssembly";
    case ErrorCode::TooManyMembers: return "TooManyMembers";
    case ErrorCode::NonPositivePopulation: return "NonPositivePopulation";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::EmptyLedger: return "EmptyLedger";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::AllZeroSwings: return "AllZeroSwings";
    case ErrorCode::NOutOfRange: return "NOutOfRange";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidPopulation: return "InvalidPopulation";
    case ErrorCode::MissingVotesColumn: return "MissingVotesColumn";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Hard cap on assembly size; exact enumeration visits all 2^n coalitions.
inline constexpr std::size_t kMaxMembers = 30;

/// Largest number of rounding digits a WeightScheme accepts.
inline constexpr int kMaxDigits = 15;

using Population = std::int64_t;

/// Bit i set means member i votes "yes".
using CoalitionId = std::uint32_t;

struct MemberState {
    std::string name;
    Population population = 0;

    friend bool operator==(const MemberState&, const MemberState&) = default;
};

/// Ordered, immutable list of members. Index i is bit i of every coalition mask.
class Assembly {
public:
    explicit Assembly(std::vector<MemberState> members) : members_(std::move(members)) {
        if (members_.empty())
            throw Error(ErrorCode::EmptyAssembly, "an assembly needs at least one member");
        if (members_.size() > kMaxMembers)
            throw Error(ErrorCode::TooManyMembers,
                        std::to_string(members_.size()) + " members exceed the cap of " +
                            std::to_string(kMaxMembers));
        std::unordered_set<std::string_view> seen;
        for (const auto& m : members_) {
            if (m.name.empty())
                throw Error(ErrorCode::DuplicateName, "member names must be nonempty");
            if (m.population < 1)
                throw Error(ErrorCode::NonPositivePopulation,
                            "population of '" + m.name + "' is " + std::to_string(m.population));
            if (!seen.insert(m.name).second)
                throw Error(ErrorCode::DuplicateName, "member '" + m.name + "' appears twice");
        }
    }

    std::size_t size() const noexcept { return members_.size(); }
    const MemberState& operator[](std::size_t i) const { return members_[i]; }
    std::span<const MemberState> members() const noexcept { return members_; }

    Population total_population() const noexcept {
        Population total = 0;
        for (const auto& m : members_) total += m.population;
        return total;
    }

    std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t i = 0; i < members_.size(); ++i)
            if (members_[i].name == name) return i;
        return std::nullopt;
    }

    /// Number of coalitions, 2^n.
    std::uint64_t coalition_count() const noexcept { return std::uint64_t{1} << members_.size(); }

    CoalitionId grand_coalition() const noexcept {
        return static_cast<CoalitionId>((std::uint64_t{1} << members_.size()) - 1);
    }

    friend bool operator==(const Assembly&, const Assembly&) = default;

private:
    std::vector<MemberState> members_;
};

inline Assembly build_assembly(const std::vector<std::pair<std::string, Population>>& rows) {
    std::vector<MemberState> members;
    members.reserve(rows.size());
    for (const auto& [name, pop] : rows) members.push_back({name, pop});
    return Assembly(std::move(members));
}

/// Coalition bitset tied to the member count it was built for.
class Coalition {
public:
    Coalition(CoalitionId bits, std::size_t n) : bits_(bits), n_(n) {
        if (n > kMaxMembers || (n < 32 && (bits >> n) != 0))
            throw std::invalid_argument("coalition has bits above member n-1");
    }

    CoalitionId bits() const noexcept { return bits_; }
    std::size_t member_count() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }
    bool contains(std::size_t i) const noexcept { return (bits_ >> i) & 1u; }
    Coalition with(std::size_t i) const { return {bits_ | (CoalitionId{1} << i), n_}; }
    Coalition without(std::size_t i) const { return {bits_ & ~(CoalitionId{1} << i), n_}; }
    Coalition complement() const {
        return {static_cast<CoalitionId>(~bits_ & ((std::uint64_t{1} << n_) - 1)), n_};
    }

    friend bool operator==(const Coalition&, const Coalition&) = default;

private:
    CoalitionId bits_;
    std::size_t n_;
};

/// Exact rational in [0, 1], used for thresholds that are compared against
/// integer counts by cross-multiplication.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

    /// Parses "0.65", "65%", "13/20" or "1".
    static Fraction parse(std::string_view text) {
        auto fail = [&] {
            return Error(ErrorCode::ParseError, "cannot parse fraction '" + std::string(text) + "'");
        };
        if (text.empty()) throw fail();
        auto digits = [&](std::string_view s, std::int64_t& out) {
            if (s.empty() || s.size() > 15) return false;
            out = 0;
            for (char c : s) {
                if (c < '0' || c > '9') return false;
                out = out * 10 + (c - '0');
            }
            return true;
        };
        Fraction f;
        if (auto slash = text.find('/'); slash != std::string_view::npos) {
            if (!digits(text.substr(0, slash), f.num) || !digits(text.substr(slash + 1), f.den) ||
                f.den == 0)
                throw fail();
        } else {
            bool percent = text.back() == '%';
            if (percent) text.remove_suffix(1);
            auto dot = text.find('.');
            std::int64_t whole = 0, frac = 0, scale = 1;
            if (dot == std::string_view::npos) {
                if (!digits(text, whole)) throw fail();
            } else {
                auto head = text.substr(0, dot), tail = text.substr(dot + 1);
                if (!head.empty() && !digits(head, whole)) throw fail();
                if (tail.empty() || !digits(tail, frac)) throw fail();
                for (std::size_t i = 0; i < tail.size(); ++i) scale *= 10;
            }
            f.num = whole * scale + frac;
            f.den = scale * (percent ? 100 : 1);
        }
        auto g = std::gcd(f.num, f.den);
        if (g > 1) f.num /= g, f.den /= g;
        return f;
    }

    /// Smallest integer c with c >= fraction * count.
    std::int64_t ceil_of(std::int64_t count) const noexcept {
        __int128 p = static_cast<__int128>(num) * count;
        return static_cast<std::int64_t>((p + den - 1) / den);
    }

    /// True iff part >= fraction * whole, exactly.
    bool reached_by(std::int64_t part, std::int64_t whole) const noexcept {
        return static_cast<__int128>(part) * den >= static_cast<__int128>(num) * whole;
    }

    friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Per-member voting weights, either full precision or rounded to k digits
/// and held as integers in units of 10^-k.
class WeightScheme {
public:
    static WeightScheme exact(std::vector<double> shares) {
        WeightScheme s;
        s.shares_ = std::move(shares);
        return s;
    }

    static WeightScheme rounded(int digits, std::vector<std::int64_t> units) {
        if (digits < 1 || digits > kMaxDigits)
            throw Error(ErrorCode::KOutOfRange, "digits must lie in 1.." + std::to_string(kMaxDigits));
        WeightScheme s;
        s.digits_ = digits;
        s.units_ = std::move(units);
        s.shares_.reserve(s.units_.size());
        for (auto u : s.units_) s.shares_.push_back(s.units_to_value(u));
        return s;
    }

    bool is_exact() const noexcept { return digits_ == 0; }
    /// 0 for exact mode.
    int digits() const noexcept { return digits_; }
    std::size_t size() const noexcept { return shares_.size(); }

    /// Weights as fractions of the total (rounded values for Rounded mode).
    std::span<const double> values() const noexcept { return shares_; }
    /// Integer weights in units of 10^-k; empty for exact mode.
    std::span<const std::int64_t> units() const noexcept { return units_; }

    /// 10^k for rounded mode.
    std::int64_t scale() const noexcept {
        std::int64_t s = 1;
        for (int i = 0; i < digits_; ++i) s *= 10;
        return s;
    }

    /// Correctly rounded u / 10^k; equals the parse of the printed decimal.
    double units_to_value(std::int64_t u) const noexcept {
        return static_cast<double>(u) / static_cast<double>(scale());
    }

    friend bool operator==(const WeightScheme&, const WeightScheme&) = default;

private:
    WeightScheme() = default;

    int digits_ = 0;
    std::vector<double> shares_;
    std::vector<std::int64_t> units_;
};

struct WeightedQuotaRule {
    WeightScheme scheme;
    double quota = 0.5;
    std::optional<int> member_quota;
};

struct NiceRule {
    std::vector<std::int64_t> votes;
    std::int64_t vote_threshold = 255;
    /// Defaults to a strict majority of members, floor(n/2) + 1.
    std::optional<int> member_threshold;
    /// nullopt disables the population clause.
    std::optional<Fraction> population_threshold = Fraction{62, 100};
};

struct DoubleMajorityRule {
    Fraction member_fraction{55, 100};
    Fraction population_fraction{65, 100};
};

using RuleDescriptor = std::variant<WeightedQuotaRule, NiceRule, DoubleMajorityRule>;

/// Rejects descriptors whose thresholds are out of range for the assembly.
inline void validate_rule(const Assembly& assembly, const RuleDescriptor& rule) {
    const auto n = static_cast<int>(assembly.size());
    auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidRule, why); };
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, WeightedQuotaRule>) {
                if (r.scheme.size() != assembly.size()) throw bad("weight count differs from member count");
                if (!(r.quota > 0.5 && r.quota <= 1.0)) throw bad("quota must lie in (0.5, 1]");
                if (r.member_quota && (*r.member_quota < 1 || *r.member_quota > n))
                    throw bad("member quota must lie in 1..n");
            } else if constexpr (std::is_same_v<T, NiceRule>) {
                if (r.votes.size() != assembly.size()) throw bad("vote count differs from member count");
                std::int64_t total = 0;
                for (auto v : r.votes) {
                    if (v < 1) throw bad("votes must be positive");
                    total += v;
                }
                if (r.vote_threshold < 1 || r.vote_threshold > total)
                    throw bad("vote threshold must lie in 1..sum of votes");
                if (r.member_threshold && (*r.member_threshold < 1 || *r.member_threshold > n))
                    throw bad("member threshold must lie in 1..n");
                if (r.population_threshold &&
                    (r.population_threshold->num < 0 || r.population_threshold->num > r.population_threshold->den))
                    throw bad("population threshold must lie in [0, 1]");
            } else {
                auto in_unit = [](const Fraction& f) { return f.num > 0 && f.num <= f.den; };
                if (!in_unit(r.member_fraction)) throw bad("member fraction must lie in (0, 1]");
                if (!in_unit(r.population_fraction)) throw bad("population fraction must lie in (0, 1]");
            }
        },
        rule);
}

/// Swing counts for one rule or quota segment. eta_i = 2 omega_i - omega.
class SwingVector {
public:
    SwingVector() = default;

    /// Builds from winning-coalition totals; throws if an omega_i exceeds omega.
    SwingVector(std::uint64_t omega, std::span<const std::uint64_t> omega_i) : omega_(omega) {
        eta_.reserve(omega_i.size());
        for (auto w : omega_i) {
            if (w > omega || 2 * w < omega)
                throw std::invalid_argument("omega_i inconsistent with a monotone rule");
            eta_.push_back(2 * w - omega);
        }
    }

    /// Direct construction when the swing counts are already known.
    static SwingVector from_eta(std::uint64_t omega, std::vector<std::uint64_t> eta) {
        SwingVector s;
        s.omega_ = omega;
        s.eta_ = std::move(eta);
        return s;
    }

    std::uint64_t omega() const noexcept { return omega_; }
    std::span<const std::uint64_t> eta() const noexcept { return eta_; }
    std::uint64_t operator[](std::size_t i) const { return eta_[i]; }
    std::size_t size() const noexcept { return eta_.size(); }

    std::uint64_t eta_total() const noexcept {
        return std::accumulate(eta_.begin(), eta_.end(), std::uint64_t{0});
    }

    friend bool operator==(const SwingVector&, const SwingVector&) = default;

private:
    std::uint64_t omega_ = 0;
    std::vector<std::uint64_t> eta_;
};

}  // namespace sqrtvote
