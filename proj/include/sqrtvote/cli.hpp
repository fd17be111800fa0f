#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "engine.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "penrose.hpp"
#include "rounding_opt.hpp"
#include "rules.hpp"
#include "weights.hpp"

namespace sqrtvote::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

inline std::string interval_text(const QuotaInterval& iv) {
    return io::format_number(iv.lo) + " < R <= " + io::format_number(iv.hi);
}

inline void print_report_text(std::ostream& out, const PowerReport& r) {
    out << std::left << std::setw(16) << "member" << std::right << std::setw(14) << "weight" << std::setw(14)
        << "banzhaf_abs" << std::setw(14) << "banzhaf_rel" << std::setw(12) << "ratio_r" << '\n';
    for (std::size_t i = 0; i < r.members.size(); ++i) {
        out << std::left << std::setw(16) << r.members[i] << std::right << std::setw(14)
            << io::format_number(r.weights[i]) << std::setw(14) << std::setprecision(6) << r.banzhaf_abs[i]
            << std::setw(14) << r.banzhaf_rel[i] << std::setw(12) << r.ratio[i] << '\n';
    }
    out << "sigma       " << io::format_number(r.sigma) << '\n';
    out << "efficiency  " << io::format_number(r.efficiency) << '\n';
    out << "omega       " << r.omega << '\n';
}

inline void emit(std::ostream& out, const std::string& format, const PowerReport& r, const io::ReportContext& ctx) {
    if (format == "json") out << io::report_json(r, ctx).dump(2) << '\n';
    else if (format == "csv") out << io::report_csv(r, ctx);
    else print_report_text(out, r);
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Square-root voting power analysis: Banzhaf indices, optimal quotas, treaty rules"};
    app.require_subcommand(1);

    std::string data;
    int digits = 0;
    std::optional<int> member_quota;
    std::string format = "text";
    unsigned threads = 0;
    const auto formats = CLI::IsMember({"text", "json", "csv"});

    auto* weights_cmd = app.add_subcommand("weights", "Square-root weights, optionally rounded");
    weights_cmd->add_option("--data", data, "CSV path or fixture name (eu27-2007, example1, example2)")->required();
    weights_cmd->add_option("--digits", digits, "rounding digits (0 = full precision)")->check(CLI::Range(0, kMaxDigits));
    weights_cmd->add_option("--format", format)->check(formats);

    std::string curve_path;
    double resolution = 0.001;
    auto* sweep_cmd = app.add_subcommand("sweep", "Optimal quota for one weight scheme");
    sweep_cmd->add_option("--data", data, "CSV path or fixture name")->required();
    sweep_cmd->add_option("--digits", digits, "rounding digits (0 = full precision)")->check(CLI::Range(0, kMaxDigits));
    sweep_cmd->add_option("--member-quota", member_quota, "minimum number of members voting yes")
        ->check(CLI::Range(1, static_cast<int>(kMaxMembers)));
    sweep_cmd->add_option("--emit-curve", curve_path, "write sigma(R) as TSV to this file");
    sweep_cmd->add_option("--resolution", resolution, "grid spacing of the emitted curve")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--format", format)->check(formats);
    sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

    int max_digits = 12;
    auto* optimize_cmd = app.add_subcommand("optimize", "Sweep rounding precision k = 1..K and full precision");
    optimize_cmd->add_option("--data", data, "CSV path or fixture name")->required();
    optimize_cmd->add_option("--max-digits", max_digits)->check(CLI::Range(1, kMaxDigits));
    optimize_cmd->add_option("--member-quota", member_quota)->check(CLI::Range(1, static_cast<int>(kMaxMembers)));
    optimize_cmd->add_option("--format", format)->check(formats);
    optimize_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::string rule_kind;
    bool no_population_clause = false;
    std::string members_frac = "0.55";
    std::string population_frac;
    std::optional<int> member_threshold;
    std::int64_t vote_threshold = 255;
    auto* rule_cmd = app.add_subcommand("rule", "Banzhaf power under the Nice or double-majority rule");
    rule_cmd->add_option("kind", rule_kind, "nice | double-majority")
        ->required()
        ->check(CLI::IsMember({"nice", "double-majority"}));
    rule_cmd->add_option("--data", data, "CSV path or fixture name")->required();
    rule_cmd->add_flag("--no-population-clause", no_population_clause, "Nice: drop the population condition");
    rule_cmd->add_option("--members-frac", members_frac, "double majority: share of members (0.55 or 0.72)");
    rule_cmd->add_option("--population-frac", population_frac, "population share (Nice 0.62, double majority 0.65)");
    rule_cmd->add_option("--member-threshold", member_threshold, "Nice: minimum members voting yes")
        ->check(CLI::Range(1, static_cast<int>(kMaxMembers)));
    rule_cmd->add_option("--vote-threshold", vote_threshold, "Nice: minimum votes")->check(CLI::PositiveNumber);
    rule_cmd->add_option("--format", format)->check(formats);
    rule_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::uint64_t voters = 0;
    auto* penrose_cmd = app.add_subcommand("penrose", "Decisiveness of one voter among N");
    penrose_cmd->add_option("--n", voters, "number of voters")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (penrose_cmd->parsed()) {
            out << "N           " << voters << '\n';
            out << "exact       " << io::format_number(penrose::decisiveness(voters)) << '\n';
            out << "asymptotic  " << io::format_number(penrose::decisiveness_asymptotic(voters)) << '\n';
            return kExitOk;
        }

        const auto ds = io::load_populations(data);
        const auto assembly = ds.assembly();
        const auto ideal = ideal_shares(assembly);
        if (member_quota && *member_quota > static_cast<int>(assembly.size())) {
            err << "usage error: --member-quota " << *member_quota << " exceeds the " << assembly.size()
                << " members\n";
            return kExitUsage;
        }

        if (weights_cmd->parsed()) {
            const auto scheme = make_scheme(assembly, digits);
            if (format == "json") {
                nlohmann::ordered_json j;
                j["data"] = ds.provenance;
                j["digits"] = digits;
                auto arr = nlohmann::ordered_json::array();
                for (std::size_t i = 0; i < assembly.size(); ++i)
                    arr.push_back({{"member", assembly[i].name},
                                   {"population", assembly[i].population},
                                   {"ideal_share", io::round_significant(ideal[i])},
                                   {"weight", io::round_significant(scheme.values()[i])}});
                j["members"] = arr;
                out << j.dump(2) << '\n';
            } else if (format == "csv") {
                out << "member,population,ideal_share,weight\n";
                for (std::size_t i = 0; i < assembly.size(); ++i)
                    out << assembly[i].name << ',' << assembly[i].population << ','
                        << io::format_number(ideal[i]) << ',' << io::format_number(scheme.values()[i]) << '\n';
            } else {
                out << std::left << std::setw(16) << "member" << std::right << std::setw(12) << "population"
                    << std::setw(20) << "ideal_share" << std::setw(20) << "weight" << '\n';
                for (std::size_t i = 0; i < assembly.size(); ++i)
                    out << std::left << std::setw(16) << assembly[i].name << std::right << std::setw(12)
                        << assembly[i].population << std::setw(20) << io::format_number(ideal[i]) << std::setw(20)
                        << io::format_number(scheme.values()[i]) << '\n';
            }
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            const auto scheme = make_scheme(assembly, digits);
            LedgerOptions lo;
            lo.member_quota = member_quota;
            lo.threads = threads;
            const auto ledger = build_ledger(assembly, scheme, lo);
            MinSigmaSearch search(ideal);
            std::optional<std::ofstream> curve_file;
            std::optional<io::CurveWriter> writer;
            if (!curve_path.empty()) {
                curve_file.emplace(curve_path);
                if (!*curve_file) throw Error(ErrorCode::IoError, "cannot write '" + curve_path + "'");
                writer.emplace(*curve_file, resolution, ideal);
            }
            sweep_quota(ledger, [&](const SegmentView& s) {
                search(s);
                if (writer) (*writer)(s);
            });
            if (writer) writer->finish();
            if (!search.found()) throw Error(ErrorCode::EmptyLedger, "no quota in (0.5, 1] has a winner");
            const auto best = search.result();
            auto report = make_power_report(assembly, best.swings, ideal, scheme.values(),
                                            describe(WeightedQuotaRule{scheme, best.canonical().hi, member_quota}));
            io::ReportContext ctx;
            ctx.sigma_min = best.sigma;
            ctx.interval = best.canonical();
            ctx.all_intervals = best.intervals;
            ctx.digits = digits;
            ctx.member_quota = member_quota;
            if (format == "text") {
                out << "data        " << ds.provenance << " (" << assembly.size() << " members)\n";
                out << "scheme      " << (digits == 0 ? std::string("full precision") : std::to_string(digits) + "-digit")
                    << '\n';
                out << "sigma_min   " << io::format_number(best.sigma) << '\n';
                for (const auto& iv : best.intervals) out << "interval    " << detail::interval_text(iv) << '\n';
                detail::print_report_text(out, report);
            } else {
                detail::emit(out, format, report, ctx);
            }
            return kExitOk;
        }

        if (optimize_cmd->parsed()) {
            RoundingOptions ro;
            ro.member_quota = member_quota;
            ro.threads = threads;
            const auto sweep = optimize_rounding(assembly, max_digits, ro);
            if (format == "json") {
                out << io::sweep_json(sweep, member_quota).dump(2) << '\n';
            } else if (format == "csv") {
                out << io::sweep_csv(sweep, member_quota);
            } else {
                out << std::setw(6) << "digits" << std::setw(20) << "sigma_min" << std::setw(20) << "quota_lo"
                    << std::setw(20) << "quota_hi" << std::setw(16) << "efficiency" << '\n';
                for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
                    const auto& r = sweep.rows[i];
                    out << std::setw(6) << (r.digits ? std::to_string(*r.digits) : "exact") << std::setw(20)
                        << io::format_number(r.sigma_min) << std::setw(20) << io::format_number(r.canonical().lo)
                        << std::setw(20) << io::format_number(r.canonical().hi) << std::setw(16)
                        << io::format_number(r.efficiency) << (i == sweep.best ? "  <- best" : "") << '\n';
                }
                const auto& b = sweep.best_row();
                out << "best digits " << (b.digits ? std::to_string(*b.digits) : "exact") << ", sigma_min "
                    << io::format_number(b.sigma_min) << " on " << detail::interval_text(b.canonical()) << '\n';
            }
            return kExitOk;
        }

        if (rule_cmd->parsed()) {
            std::optional<RuleDescriptor> rule;
            std::vector<double> weights;
            if (rule_kind == "nice") {
                NiceRule r;
                r.votes = ds.votes();
                r.vote_threshold = vote_threshold;
                r.member_threshold = member_threshold;
                if (no_population_clause) r.population_threshold.reset();
                else if (!population_frac.empty()) r.population_threshold = Fraction::parse(population_frac);
                for (auto v : r.votes) weights.push_back(static_cast<double>(v));
                rule.emplace(r);
            } else {
                DoubleMajorityRule r;
                r.member_fraction = Fraction::parse(members_frac);
                if (!population_frac.empty()) r.population_fraction = Fraction::parse(population_frac);
                const auto total = static_cast<double>(assembly.total_population());
                for (const auto& m : assembly.members()) weights.push_back(static_cast<double>(m.population) / total);
                rule.emplace(r);
            }
            EvaluateOptions eo;
            eo.threads = threads;
            const auto swings = evaluate_rule(assembly, *rule, eo);
            const auto report = make_power_report(assembly, swings, ideal, weights, describe(*rule));
            detail::emit(out, format, report, {});
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace sqrtvote::cli
