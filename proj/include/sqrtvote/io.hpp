#pragma once

// Population CSV ingestion, embedded fixtures, and report/curve emission.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "engine.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "rounding_opt.hpp"

namespace sqrtvote::io {

struct PopulationRow {
    std::string name;
    Population population = 0;
    std::optional<std::int64_t> votes;

    friend bool operator==(const PopulationRow&, const PopulationRow&) = default;
};

struct PopulationDataset {
    std::vector<PopulationRow> rows;
    std::string provenance;

    bool has_votes() const noexcept { return !rows.empty() && rows.front().votes.has_value(); }

    Assembly assembly() const {
        std::vector<MemberState> members;
        members.reserve(rows.size());
        for (const auto& r : rows) members.push_back({r.name, r.population});
        return Assembly(std::move(members));
    }

    std::vector<std::int64_t> votes() const {
        if (!has_votes()) throw Error(ErrorCode::MissingVotesColumn, "dataset has no votes column");
        std::vector<std::int64_t> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(*r.votes);
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cols;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (ch == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (ch == ',' && !quoted) {
            cols.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cols.push_back(std::move(cur));
    return cols;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline Error parse_error(std::size_t row, std::size_t col, const std::string& what) {
    return Error(ErrorCode::ParseError, "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what);
}

// Plain decimal digits only; thousands separators and signs are rejected.
inline std::int64_t parse_count(std::string_view cell, std::size_t row, std::size_t col) {
    cell = trim(cell);
    if (cell.empty()) throw parse_error(row, col, "empty numeric cell");
    for (char c : cell)
        if (c < '0' || c > '9') throw parse_error(row, col, "'" + std::string(cell) + "' is not a plain integer");
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw parse_error(row, col, "'" + std::string(cell) + "' is out of range");
    return value;
}

}  // namespace detail

/// Parses `name,population[,votes]` CSV text. Rows are numbered from 1,
/// the header being row 1.
inline PopulationDataset parse_populations(std::string_view text, std::string provenance = {}) {
    PopulationDataset ds;
    ds.provenance = std::move(provenance);
    std::size_t row = 0;
    bool header_seen = false;
    bool with_votes = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = detail::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++row;
        if (line.empty()) continue;
        auto cols = detail::split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (cols.size() < 2 || cols.size() > 3 || detail::trim(cols[0]) != "name" ||
                detail::trim(cols[1]) != "population" || (cols.size() == 3 && detail::trim(cols[2]) != "votes"))
                throw detail::parse_error(row, 1, "header must be name,population[,votes]");
            with_votes = cols.size() == 3;
            continue;
        }
        const std::size_t expected = with_votes ? 3 : 2;
        if (cols.size() != expected)
            throw detail::parse_error(row, std::min(cols.size(), expected) + 1,
                                      "expected " + std::to_string(expected) + " columns, found " +
                                          std::to_string(cols.size()));
        PopulationRow r;
        r.name = std::string(detail::trim(cols[0]));
        if (r.name.empty()) throw detail::parse_error(row, 1, "empty name");
        r.population = detail::parse_count(cols[1], row, 2);
        if (r.population < 1)
            throw Error(ErrorCode::InvalidPopulation, "row " + std::to_string(row) + ": population must be positive");
        if (with_votes) {
            r.votes = detail::parse_count(cols[2], row, 3);
            if (*r.votes < 1)
                throw Error(ErrorCode::InvalidPopulation, "row " + std::to_string(row) + ": votes must be positive");
        }
        ds.rows.push_back(std::move(r));
    }
    if (!header_seen) throw detail::parse_error(1, 1, "missing header");
    if (ds.rows.empty()) throw Error(ErrorCode::EmptyAssembly, "dataset has no rows");
    ds.assembly();  // validates names and size
    return ds;
}

// EU member states, 2007 populations (Belgium, Ireland and Luxembourg from
// 2006), with Treaty of Nice votes.
inline constexpr std::string_view kEu27Csv =
    "name,population,votes\n"
    "Germany,82310995,29\n"
    "France,63392140,29\n"
    "UK,60798438,29\n"
    "Italy,59131287,29\n"
    "Spain,44474631,27\n"
    "Poland,38125479,27\n"
    "Romania,21565119,14\n"
    "Netherlands,16357992,13\n"
    "Greece,11170957,12\n"
    "Portugal,10599095,12\n"
    "Belgium,10511382,12\n"
    "Czech Republic,10287189,12\n"
    "Hungary,10064000,12\n"
    "Sweden,9113257,10\n"
    "Austria,8298923,10\n"
    "Bulgaria,7679290,10\n"
    "Denmark,5447084,7\n"
    "Slovakia,5393637,7\n"
    "Finland,5276955,7\n"
    "Ireland,4209019,7\n"
    "Lithuania,3384879,7\n"
    "Latvia,2281305,4\n"
    "Slovenia,2010377,4\n"
    "Estonia,1342409,4\n"
    "Cyprus,778537,4\n"
    "Luxembourg,459500,4\n"
    "Malta,406020,3\n";

// Four-country examples whose square roots are integers.
inline constexpr std::string_view kExample1Csv =
    "name,population\n"
    "1,20295025\n"
    "2,6265009\n"
    "3,4012009\n"
    "4,978121\n";

inline constexpr std::string_view kExample2Csv =
    "name,population\n"
    "1,20376196\n"
    "2,6280036\n"
    "3,4024036\n"
    "4,948676\n";

inline std::optional<PopulationDataset> fixture(std::string_view name) {
    if (name == "eu27-2007")
        return parse_populations(kEu27Csv, "EU-27 2007, Belgium/Ireland/Luxembourg 2006");
    if (name == "example1") return parse_populations(kExample1Csv, "four-country example 1");
    if (name == "example2") return parse_populations(kExample2Csv, "four-country example 2");
    return std::nullopt;
}

/// Embedded fixture by name, otherwise a CSV file path.
inline PopulationDataset load_populations(const std::string& source) {
    if (auto ds = fixture(source)) return *ds;
    std::ifstream in(source, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + source + "' (and no fixture has that name)");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_populations(buf.str(), source);
}

/// 12 significant digits, as used in every emitted report.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline double round_significant(double v) { return std::stod(format_number(v)); }

namespace detail {

inline nlohmann::ordered_json interval_json(const QuotaInterval& iv) {
    nlohmann::ordered_json j;
    j["quota_lo"] = round_significant(iv.lo);
    j["quota_hi"] = round_significant(iv.hi);
    return j;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// Optional context scalars that accompany a power report.
struct ReportContext {
    std::optional<double> sigma_min;
    std::optional<QuotaInterval> interval;
    std::vector<QuotaInterval> all_intervals;
    std::optional<int> digits;
    std::optional<int> member_quota;
};

inline nlohmann::ordered_json report_json(const PowerReport& r, const ReportContext& ctx = {}) {
    nlohmann::ordered_json j;
    j["rule"] = r.rule;
    j["sigma"] = round_significant(r.sigma);
    if (ctx.sigma_min) j["sigma_min"] = round_significant(*ctx.sigma_min);
    if (ctx.interval) {
        j["quota_lo"] = round_significant(ctx.interval->lo);
        j["quota_hi"] = round_significant(ctx.interval->hi);
    }
    if (ctx.all_intervals.size() > 1) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& iv : ctx.all_intervals) arr.push_back(detail::interval_json(iv));
        j["intervals"] = arr;
    }
    j["efficiency"] = round_significant(r.efficiency);
    j["omega"] = r.omega;
    j["digits"] = ctx.digits ? nlohmann::ordered_json(*ctx.digits) : nlohmann::ordered_json(nullptr);
    j["member_quota"] = ctx.member_quota ? nlohmann::ordered_json(*ctx.member_quota) : nlohmann::ordered_json(nullptr);
    auto members = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.members.size(); ++i) {
        nlohmann::ordered_json m;
        m["member"] = r.members[i];
        m["weight"] = round_significant(r.weights[i]);
        m["banzhaf_abs"] = round_significant(r.banzhaf_abs[i]);
        m["banzhaf_rel"] = round_significant(r.banzhaf_rel[i]);
        m["ratio_r"] = round_significant(r.ratio[i]);
        members.push_back(std::move(m));
    }
    j["members"] = std::move(members);
    return j;
}

/// Member table, a blank line, then key,value scalars.
inline std::string report_csv(const PowerReport& r, const ReportContext& ctx = {}) {
    std::ostringstream out;
    out << "member,weight,banzhaf_abs,banzhaf_rel,ratio_r\n";
    for (std::size_t i = 0; i < r.members.size(); ++i)
        out << detail::csv_escape(r.members[i]) << ',' << format_number(r.weights[i]) << ','
            << format_number(r.banzhaf_abs[i]) << ',' << format_number(r.banzhaf_rel[i]) << ','
            << format_number(r.ratio[i]) << '\n';
    out << "\nkey,value\n";
    out << "rule," << detail::csv_escape(r.rule) << '\n';
    out << "sigma," << format_number(r.sigma) << '\n';
    if (ctx.sigma_min) out << "sigma_min," << format_number(*ctx.sigma_min) << '\n';
    if (ctx.interval) {
        out << "quota_lo," << format_number(ctx.interval->lo) << '\n';
        out << "quota_hi," << format_number(ctx.interval->hi) << '\n';
    }
    out << "efficiency," << format_number(r.efficiency) << '\n';
    out << "omega," << r.omega << '\n';
    out << "digits," << (ctx.digits ? std::to_string(*ctx.digits) : "") << '\n';
    out << "member_quota," << (ctx.member_quota ? std::to_string(*ctx.member_quota) : "") << '\n';
    return out.str();
}

/// Reads back what report_csv wrote. Scalars land in `scalars` as text.
struct ParsedReportCsv {
    std::vector<std::string> members;
    std::vector<double> weights, banzhaf_abs, banzhaf_rel, ratio;
    std::vector<std::pair<std::string, std::string>> scalars;

    std::optional<std::string> scalar(std::string_view key) const {
        for (const auto& [k, v] : scalars)
            if (k == key) return v;
        return std::nullopt;
    }
};

inline ParsedReportCsv parse_report_csv(std::string_view text) {
    ParsedReportCsv out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t row = 0;
    int section = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            section = 2;
            continue;
        }
        auto cols = detail::split_csv_line(line);
        if (row == 1) {
            if (line != "member,weight,banzhaf_abs,banzhaf_rel,ratio_r")
                throw detail::parse_error(row, 1, "unexpected report header");
            section = 1;
            continue;
        }
        if (section == 1) {
            if (cols.size() != 5) throw detail::parse_error(row, 1, "member rows need 5 columns");
            out.members.push_back(cols[0]);
            out.weights.push_back(std::stod(cols[1]));
            out.banzhaf_abs.push_back(std::stod(cols[2]));
            out.banzhaf_rel.push_back(std::stod(cols[3]));
            out.ratio.push_back(std::stod(cols[4]));
        } else if (section == 2) {
            if (line == "key,value") continue;
            if (cols.size() != 2) throw detail::parse_error(row, 1, "scalar rows need 2 columns");
            out.scalars.emplace_back(cols[0], cols[1]);
        }
    }
    return out;
}

inline nlohmann::ordered_json sweep_json(const RoundingSweep& sweep, std::optional<int> member_quota) {
    nlohmann::ordered_json j;
    j["member_quota"] = member_quota ? nlohmann::ordered_json(*member_quota) : nlohmann::ordered_json(nullptr);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : sweep.rows) {
        nlohmann::ordered_json row;
        row["digits"] = r.digits ? nlohmann::ordered_json(*r.digits) : nlohmann::ordered_json("exact");
        row["sigma_min"] = round_significant(r.sigma_min);
        row["quota_lo"] = round_significant(r.canonical().lo);
        row["quota_hi"] = round_significant(r.canonical().hi);
        row["efficiency"] = round_significant(r.efficiency);
        row["tied_intervals"] = r.intervals.size();
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    const auto& best = sweep.best_row();
    j["digits"] = best.digits ? nlohmann::ordered_json(*best.digits) : nlohmann::ordered_json("exact");
    j["sigma_min"] = round_significant(best.sigma_min);
    j["quota_lo"] = round_significant(best.canonical().lo);
    j["quota_hi"] = round_significant(best.canonical().hi);
    j["efficiency"] = round_significant(best.efficiency);
    return j;
}

inline std::string sweep_csv(const RoundingSweep& sweep, std::optional<int> member_quota) {
    std::ostringstream out;
    out << "digits,sigma_min,quota_lo,quota_hi,efficiency,member_quota\n";
    const std::string mq = member_quota ? std::to_string(*member_quota) : "";
    for (const auto& r : sweep.rows)
        out << (r.digits ? std::to_string(*r.digits) : "exact") << ',' << format_number(r.sigma_min) << ','
            << format_number(r.canonical().lo) << ',' << format_number(r.canonical().hi) << ','
            << format_number(r.efficiency) << ',' << mq << '\n';
    return out.str();
}

/// Streams sigma(R) as TSV for plotting. Feed segments in the order
/// sweep_quota produces them (descending R). Output rows are in descending R:
/// one sample row per grid point R = 0.5 + j * resolution, j = 0..0.5/resolution,
/// and one row per segment at R = hi.
class CurveWriter {
public:
    CurveWriter(std::ostream& out, double resolution, std::span<const double> ideal)
        : out_(out), resolution_(resolution), ideal_(ideal.begin(), ideal.end()) {
        if (!(resolution > 0.0)) throw std::invalid_argument("curve resolution must be positive");
        grid_count_ = static_cast<std::int64_t>(std::floor(0.5 / resolution + 1e-9));
        next_grid_ = grid_count_;
        out_ << "R\tsigma\n";
    }

    void operator()(const SegmentView& s) { add(s.interval, sigma_from_eta(s.eta, ideal_)); }

    void add(QuotaInterval iv, double sigma) {
        if (!sqrtvote::detail::clip_to_majority(iv)) return;
        // Grid points above the top segment take its value.
        if (!started_)
            for (; next_grid_ >= 0 && grid(next_grid_) > iv.hi; --next_grid_) write(grid(next_grid_), sigma);
        // A breakpoint on a grid point is written once, as the grid sample.
        if (next_grid_ < 0 || std::abs(grid(next_grid_) - iv.hi) > 1e-9 * resolution_) write(iv.hi, sigma);
        for (; next_grid_ >= 0 && grid(next_grid_) > iv.lo; --next_grid_) write(grid(next_grid_), sigma);
        started_ = true;
        last_sigma_ = sigma;
    }

    /// Remaining grid points lie at or below the lowest segment's lo (R = 0.5
    /// itself); they take the value just above.
    void finish() {
        for (; started_ && next_grid_ >= 0; --next_grid_) write(grid(next_grid_), last_sigma_);
    }

private:
    double grid(std::int64_t j) const { return 0.5 + static_cast<double>(j) * resolution_; }
    void write(double r, double sigma) { out_ << format_number(r) << '\t' << format_number(sigma) << '\n'; }

    std::ostream& out_;
    double resolution_;
    std::vector<double> ideal_;
    std::int64_t grid_count_ = 0;
    std::int64_t next_grid_ = 0;
    bool started_ = false;
    double last_sigma_ = 0.0;
};

inline std::string emit_curve(std::span<const SigmaSegment> segments, double resolution) {
    std::ostringstream out;
    CurveWriter writer(out, resolution, {});
    for (const auto& s : segments) writer.add(s.interval, s.sigma);
    writer.finish();
    return out.str();
}

}  // namespace sqrtvote::io
