// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sqrtvote/sqrtvote.hpp>

#include "oracle.hpp"
#include "tables.hpp"

using namespace sqrtvote;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failed checks for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream s;
            s.precision(15);
            s << what << ": got " << got << ", want " << want << " +/- " << tol;
            failures.push_back(s.str());
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

int g_failed = 0;

void report(int id, const std::string& title, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = Clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::string extra;
    for (const auto& n : c.notes) extra += "; " + n;
    std::printf("[%2d] %s  %s  (%.1f s%s)\n", id, c.failures.empty() ? "PASS" : "FAIL", title.c_str(), secs,
                extra.c_str());
    for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
    std::fflush(stdout);
    if (!c.failures.empty()) ++g_failed;
}

std::string fmt(double v) { return io::format_number(v); }

void check_table(Check& c, const std::string& fixture, int digits, const std::vector<tables::Row>& rows,
                 const std::string& label) {
    const auto a = io::fixture(fixture)->assembly();
    const auto ideal = ideal_shares(a);
    LedgerOptions o;
    o.majority_only = false;
    const auto curve = collect_curve(build_ledger(a, make_scheme(a, digits), o));
    c.expect(curve.size() == rows.size(), label + ": " + std::to_string(curve.size()) + " segments");
    for (std::size_t r = 0; r < std::min(curve.size(), rows.size()); ++r) {
        const auto& seg = curve[r];
        const std::string at = label + " row " + std::to_string(r + 1);
        if (digits == 0) {
            c.near(seg.interval.lo, rows[r].lo, 1e-12, at + " lo");
            c.near(std::min(seg.interval.hi, 1.0), rows[r].hi, 1e-12, at + " hi");
        } else {
            c.expect(seg.interval.lo_units == std::llround(rows[r].lo * 1000) &&
                         seg.interval.hi_units == std::llround(rows[r].hi * 1000),
                     at + " interval");
        }
        c.expect(std::equal(rows[r].eta.begin(), rows[r].eta.end(), seg.swings.eta().begin(), seg.swings.eta().end()),
                 at + " eta");
        c.near(sigma_from_eta(seg.swings.eta(), ideal), rows[r].sigma, 5e-7, at + " sigma");
    }
}

MinSigma best_of(const std::string& fixture, int digits) {
    const auto a = io::fixture(fixture)->assembly();
    auto r = min_sigma(build_ledger(a, make_scheme(a, digits)), ideal_shares(a));
    if (!r) throw std::runtime_error("no optimum");
    return *r;
}

struct EuSweep {
    RoundingSweep sweep;
    double exact_seconds = 0.0;
};

// One k = 1..12 sweep per member quota, shared by several criteria.
EuSweep eu_sweep(std::optional<int> member_quota) {
    const auto a = io::fixture("eu27-2007")->assembly();
    RoundingOptions o;
    o.member_quota = member_quota;
    EuSweep s;
    auto last = Clock::now();
    o.on_row = [&](const RoundingSweepRow& row) {
        const auto now = Clock::now();
        if (!row.digits) s.exact_seconds = std::chrono::duration<double>(now - last).count();
        last = now;
    };
    s.sweep = optimize_rounding(a, 12, o);
    return s;
}

const RoundingSweepRow& row_for(const RoundingSweep& s, int digits) {
    for (const auto& r : s.rows)
        if (r.digits == digits) return r;
    throw std::runtime_error("missing row");
}

std::string digits_text(const RoundingSweepRow& r) { return r.digits ? std::to_string(*r.digits) : "exact"; }

}  // namespace

int main() {
    const auto eu = *io::fixture("eu27-2007");
    const auto eu_assembly = eu.assembly();

    report(1, "Example 1, full precision: 15-row table, optimum (0.5494, 0.5495], < 1 ms", [](Check& c) {
        check_table(c, "example1", 0, tables::kExample1Exact, "table");
        const auto a = io::fixture("example1")->assembly();
        const auto ideal = ideal_shares(a);
        const auto scheme = make_scheme(a, 0);
        LedgerOptions o;
        o.threads = 1;
        double best_ms = 1e9;
        std::optional<MinSigma> b;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = Clock::now();
            b = min_sigma(build_ledger(a, scheme, o), ideal);
            best_ms = std::min(best_ms, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        }
        c.near(b->sigma, 0.031053, 5e-7, "sigma_min");
        c.near(b->canonical().lo, 0.5494, 1e-12, "lo");
        c.near(b->canonical().hi, 0.5495, 1e-12, "hi");
        c.expect(best_ms < 1.0, "runtime " + fmt(best_ms) + " ms");
        c.note("sigma_min " + fmt(b->sigma) + ", " + fmt(best_ms) + " ms");
    });

    report(2, "Example 1, 3 digits: 15-row table, optimum (0.651, 0.701]", [](Check& c) {
        check_table(c, "example1", 3, tables::kExample1Rounded3, "table");
        const auto b = best_of("example1", 3);
        c.near(b.sigma, 0.061200, 5e-7, "sigma_min");
        c.expect(b.canonical().lo_units == 651 && b.canonical().hi_units == 701, "interval");
        c.note("sigma_min " + fmt(b.sigma));
    });

    report(3, "Example 2, full precision and 3 digits: both tables and optima", [](Check& c) {
        check_table(c, "example2", 0, tables::kExample2Exact, "exact table");
        check_table(c, "example2", 3, tables::kExample2Rounded3, "3-digit table");
        auto b = best_of("example2", 0);
        c.near(b.sigma, 0.061093, 5e-7, "exact sigma_min");
        c.near(b.canonical().lo, 0.6520, 1e-12, "exact lo");
        c.near(b.canonical().hi, 0.7020, 1e-12, "exact hi");
        b = best_of("example2", 3);
        c.near(b.sigma, 0.031004, 5e-7, "3-digit sigma_min");
        c.expect(b.canonical().lo_units == 548 && b.canonical().hi_units == 549, "3-digit interval");
    });

    std::printf("     running EU-27 rounding sweeps (k = 1..12 and full precision, 5 member quotas)...\n");
    std::fflush(stdout);
    const auto t_sweep = Clock::now();
    const auto plain = eu_sweep(std::nullopt);
    std::printf("     no member quota: %.1f s\n", std::chrono::duration<double>(Clock::now() - t_sweep).count());
    std::fflush(stdout);

    report(4, "EU-27 full precision: sigma_min 4.334790e-5, optimal interval endpoints, < 5 min", [&](Check& c) {
        const auto& r = plain.sweep.exact_row();
        c.near(r.sigma_min, 4.334790e-5, 1e-10, "sigma_min");
        c.expect(r.intervals.size() == 1, "single optimal interval");
        c.near(r.canonical().lo, 0.614966335781001, 1e-12, "lo");
        c.near(r.canonical().hi, 0.614966337885155, 1e-12, "hi");
        c.expect(plain.exact_seconds < 300.0, "runtime");
        char buf[160];
        std::snprintf(buf, sizeof buf, "sigma_min %.10e on (%.15f, %.15f], %.1f s", r.sigma_min, r.canonical().lo,
                      r.canonical().hi, plain.exact_seconds);
        c.note(buf);
    });

    report(5, "EU-27 7 digits: sigma_min 4.334644e-5 on (0.6149670, 0.6149671], k = 7 best of 1..12", [&](Check& c) {
        const auto& r = row_for(plain.sweep, 7);
        c.near(r.sigma_min, 4.334644e-5, 1e-10, "sigma_min");
        c.expect(r.intervals.size() == 1 && r.canonical().lo_units == 6149670 && r.canonical().hi_units == 6149671,
                 "interval");
        const auto& best = plain.sweep.best_row();
        c.expect(best.digits == 7, "best digits " + digits_text(best));
        c.note("best " + digits_text(best) + ", sigma_min " + fmt(r.sigma_min));
    });

    struct QuotaCase {
        int m;
        int digits;
        double sigma;
        std::int64_t lo, hi;
        double eff;
        // Half a unit in the last printed digit of sigma.
        double sigma_tol;
    };
    const std::vector<QuotaCase> cases = {
        {14, 6, 1.10654e-3, 646660, 646661, 0.104526, 5e-9},
        {15, 6, 2.17490e-3, 682884, 682885, 0.057132, 5e-9},
        {18, 6, 6.49661e-3, 784222, 784223, 0.005479, 5e-9},
        {20, 2, 1.01626e-2, 80, 81, 0.000904, 5e-8},
    };
    std::vector<EuSweep> quota_sweeps;
    for (const auto& qc : cases) {
        const auto t0 = Clock::now();
        quota_sweeps.push_back(eu_sweep(qc.m));
        std::printf("     member quota %d: %.1f s\n", qc.m, std::chrono::duration<double>(Clock::now() - t0).count());
        std::fflush(stdout);
    }

    report(6, "Efficiencies: square root 0.1644, Nice 0.02026, draft constitution 0.1284, member quotas", [&](Check& c) {
        const double sq = plain.sweep.best_row().efficiency;
        c.near(sq, 0.1644, 5e-5, "square root");
        NiceRule nice;
        nice.votes = eu.votes();
        const auto e_nice = efficiency(evaluate_rule(eu_assembly, nice).omega(), 27);
        c.near(e_nice, 0.02026, 5e-6, "Nice");
        const auto e_dm = efficiency(evaluate_rule(eu_assembly, DoubleMajorityRule{}).omega(), 27);
        c.near(e_dm, 0.1284, 5e-5, "draft constitution");
        std::string line;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const auto& r = row_for(quota_sweeps[i].sweep, cases[i].digits);
            c.near(r.efficiency, cases[i].eff, 1e-6, "m=" + std::to_string(cases[i].m));
            line += " m" + std::to_string(cases[i].m) + "=" + fmt(r.efficiency);
        }
        c.note("sqrt " + fmt(sq) + ", Nice " + fmt(e_nice) + ", DC " + fmt(e_dm) + ";" + line);
    });

    report(7, "Member-quota optima for m = 14, 15, 18, 20 with optimal digits 6, 6, 6, 2", [&](Check& c) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const auto& qc = cases[i];
            const auto& sweep = quota_sweeps[i].sweep;
            const std::string m = "m=" + std::to_string(qc.m);
            const auto& best = sweep.best_row();
            c.expect(best.digits == qc.digits, m + " best digits " + digits_text(best));
            const auto& r = row_for(sweep, qc.digits);
            c.near(r.sigma_min, qc.sigma, qc.sigma_tol, m + " sigma_min");
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s sigma %.9e (off %.1e, tol %.0e)", m.c_str(), r.sigma_min,
                          r.sigma_min - qc.sigma, qc.sigma_tol);
            c.note(buf);
            c.expect(r.canonical().lo_units == qc.lo && r.canonical().hi_units == qc.hi,
                     m + " interval (" + fmt(r.canonical().lo) + ", " + fmt(r.canonical().hi) + "]");
        }
    });

    report(8, "EU-27 weights: 7-digit column within 5e-8, member quota 20 column exact at 2 digits", [&](Check& c) {
        const auto shares = ideal_shares(eu_assembly);
        const auto w7 = round_scheme(shares, 7);
        const auto w2 = round_scheme(shares, 2);
        for (std::size_t i = 0; i < 27; ++i) {
            const auto& name = eu_assembly[i].name;
            c.near(shares[i], tables::kEu27Weights7[i], 5e-8, name);
            c.near(w7.values()[i], tables::kEu27Weights7[i], 5e-8, name + " (7-digit)");
            c.expect(w2.units()[i] == tables::kEu27Units2[i], name + " (2-digit)");
        }
    });

    report(9, "2006 data / 4-digit claim: EXCLUDED (dataset not published); substitute: sweep invariants on user data",
           [](Check& c) {
               std::mt19937_64 rng(2006);
               for (int t = 0; t < 10; ++t) {
                   const auto n = 4 + rng() % 11;
                   const auto a = oracle::random_assembly(rng, n);
                   const auto ideal = ideal_shares(a);
                   const auto sweep = optimize_rounding(a, 8);
                   for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
                       const auto& row = sweep.rows[i];
                       c.expect(row.sigma_min >= sweep.best_row().sigma_min, "best is minimal");
                       c.expect(i >= sweep.best || row.sigma_min > sweep.best_row().sigma_min, "ties go to small k");
                       c.expect(row.canonical().lo >= 0.5 && row.canonical().hi <= 1.0, "interval in (0.5, 1]");
                       oracle::Swings want;
                       if (row.digits) {
                           const auto s = round_scheme(ideal, *row.digits);
                           want = oracle::quota_swings_units({s.units().begin(), s.units().end()},
                                                             row.canonical().hi_units);
                       } else {
                           want = oracle::quota_swings_real(ideal, 0.5 * (row.canonical().lo + row.canonical().hi));
                       }
                       c.expect(want.omega == row.swings.omega() &&
                                    std::equal(want.eta.begin(), want.eta.end(), row.swings.eta().begin()),
                                "swings at optimum vs brute force");
                       c.expect(oracle::sigma(want.eta, ideal) == row.sigma_min, "sigma at optimum");
                   }
               }
               c.note("claim itself not evaluated");
           });

    report(10, "Property suites: oracle equivalence, sum/monotonicity, thread determinism, Penrose", [](Check& c) {
        // (a) 100 random assemblies, n <= 12.
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int mismatches = 0;
        for (int t = 0; t < 100; ++t) {
            const auto n = 1 + rng() % 12;
            const auto a = oracle::random_assembly(rng, n);
            const int digits = static_cast<int>(rng() % 7);
            const auto scheme = make_scheme(a, digits);
            LedgerOptions o;
            o.majority_only = false;
            const auto curve = collect_curve(build_ledger(a, scheme, o));
            for (const auto& seg : curve) {
                if (seg.interval.hi <= 0.5 || seg.interval.lo >= 1.0) continue;
                // A quota inside the segment: the midpoint, or the top unit for rounded weights.
                double r = 0.5 * (std::max(seg.interval.lo, 0.5) + std::min(seg.interval.hi, 1.0));
                std::int64_t q_units = 0;
                if (digits) {
                    q_units = std::min(seg.interval.hi_units, scheme.scale());
                    r = scheme.units_to_value(q_units);
                }
                const auto want =
                    digits == 0
                        ? oracle::quota_swings_real({scheme.values().begin(), scheme.values().end()}, r)
                        : oracle::quota_swings_units({scheme.units().begin(), scheme.units().end()}, q_units);
                const auto ev = evaluate_rule(a, WeightedQuotaRule{scheme, r, {}});
                const bool ok = want.omega == seg.swings.omega() &&
                                std::equal(want.eta.begin(), want.eta.end(), seg.swings.eta().begin()) &&
                                want.omega == ev.omega() && std::equal(want.eta.begin(), want.eta.end(), ev.eta().begin());
                if (!ok) ++mismatches;
            }
        }
        c.expect(mismatches == 0, "(a) " + std::to_string(mismatches) + " segment mismatches");

        // (b) sum of beta, omega monotone in R, predicate monotonicity.
        for (int t = 0; t < 30; ++t) {
            const auto n = 2 + rng() % 14;
            const auto a = oracle::random_assembly(rng, n);
            LedgerOptions o;
            o.majority_only = false;
            const auto curve = collect_curve(build_ledger(a, make_scheme(a, static_cast<int>(rng() % 6)), o));
            std::uint64_t prev = 0;
            for (const auto& seg : curve) {
                c.expect(seg.swings.omega() > prev, "(b) omega monotone");
                prev = seg.swings.omega();
                const auto beta = banzhaf_relative(seg.swings);
                c.near(std::accumulate(beta.begin(), beta.end(), 0.0), 1.0, 1e-12, "(b) sum beta");
            }
            NiceRule nice;
            for (std::size_t i = 0; i < n; ++i) nice.votes.push_back(1 + static_cast<std::int64_t>(rng() % 29));
            nice.vote_threshold = 1 + static_cast<std::int64_t>(rng() % 40);
            nice.vote_threshold = std::min(nice.vote_threshold, std::accumulate(nice.votes.begin(), nice.votes.end(), std::int64_t{0}));
            const std::vector<RuleDescriptor> rules = {
                nice, DoubleMajorityRule{}, WeightedQuotaRule{make_scheme(a, 0), 0.5 + 0.5 * unit(rng), 2}};
            for (const auto& rule : rules)
                for (int s = 0; s < 100; ++s) {
                    const auto cid = static_cast<CoalitionId>(rng() & a.grand_coalition());
                    if (!is_winning(a, rule, cid)) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        c.expect(is_winning(a, rule, cid | (CoalitionId{1} << i)), "(b) predicate monotone");
                }
        }

        // (c) determinism across 1, 2 and 8 threads.
        const auto a = oracle::random_assembly(rng, 22);
        const auto ideal = ideal_shares(a);
        for (int digits : {0, 5}) {
            std::vector<std::uint64_t> keys0;
            std::optional<MinSigma> best0;
            for (unsigned th : {1u, 2u, 8u}) {
                LedgerOptions o;
                o.threads = th;
                const auto ledger = build_ledger(a, make_scheme(a, digits), o);
                const auto best = min_sigma(ledger, ideal);
                if (th == 1) {
                    keys0.assign(ledger.keys().begin(), ledger.keys().end());
                    best0 = best;
                    continue;
                }
                c.expect(std::equal(keys0.begin(), keys0.end(), ledger.keys().begin(), ledger.keys().end()),
                         "(c) ledger keys");
                c.expect(best->sigma == best0->sigma && best->intervals == best0->intervals, "(c) optimum");
            }
        }

        // (d) Penrose: exact vs enumeration, asymptotic bound.
        for (unsigned n = 1; n <= 20; ++n)
            c.expect(penrose::decisiveness(n) == oracle::penrose_enumerated(n), "(d) N=" + std::to_string(n));
        const double k = std::sqrt(2.0 / std::numbers::pi);
        std::uint64_t bad = 0;
        for (std::uint64_t n = 100; n <= 1'000'000; ++n) {
            const double rn = std::sqrt(static_cast<double>(n));
            if (!(std::abs(penrose::decisiveness(n) * rn - k) < 0.1 / rn)) ++bad;
        }
        c.expect(bad == 0, "(d) asymptotic bound violated " + std::to_string(bad) + " times");
    });

    std::printf("%s: %d of 10 criteria failed\n", g_failed ? "FAIL" : "PASS", g_failed);
    return g_failed ? 1 : 0;
}
