#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/simulate.hpp"
#include "mcdiag/version.hpp"

namespace mcdiag {

enum class DrawsLayout { Long, WidePerParam };

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, bool admit_nonfinite) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v) && !admit_nonfinite)
            throw ParseError("non-finite value at line " + std::to_string(line_no) +
                             " (pass admit_nonfinite to accept)");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("cannot parse '" + s + "' as a number at line " + std::to_string(line_no));
    }
}

inline std::string format_full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// LONG layout: header "chain,draw,<name>..."; one row per (chain, draw).
// Chain indices may start at 0 or 1 (normalized); draw indices must be
// strictly increasing within a chain; chains must be rectangular.
inline DrawsMatrix read_draws_long(std::istream& in, char delim = ',',
                                   bool admit_nonfinite = false) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_line(line, delim);
    if (header.size() < 3 || header[0] != "chain" || header[1] != "draw")
        throw ParseError("LONG layout needs header 'chain" + std::string(1, delim) + "draw" +
                         std::string(1, delim) + "<param>...'");
    const std::size_t n_params = header.size() - 2;

    std::map<long long, std::vector<std::vector<double>>> per_chain;  // chain -> param -> draws
    std::map<long long, long long> last_draw;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_line(line, delim);
        if (fields.size() != header.size())
            throw ParseError("wrong field count at line " + std::to_string(line_no));
        const auto chain = static_cast<long long>(detail::parse_double(fields[0], line_no, false));
        const auto draw = static_cast<long long>(detail::parse_double(fields[1], line_no, false));
        auto [it, fresh] = per_chain.try_emplace(chain, n_params);
        if (!fresh && draw <= last_draw[chain])
            throw ParseError("draw indices not strictly increasing in chain " +
                             std::to_string(chain) + " at line " + std::to_string(line_no));
        last_draw[chain] = draw;
        for (std::size_t p = 0; p < n_params; ++p)
            it->second[p].push_back(detail::parse_double(fields[p + 2], line_no, admit_nonfinite));
    }
    if (per_chain.empty()) throw ParseError("no draws in input");

    const std::size_t n_iters = per_chain.begin()->second.front().size();
    for (const auto& [chain, params] : per_chain)
        if (params.front().size() != n_iters)
            throw ParseError("ragged chains: chain " + std::to_string(chain) + " has " +
                             std::to_string(params.front().size()) + " draws, expected " +
                             std::to_string(n_iters));

    DrawsMatrix out;
    out.parameter_names.assign(header.begin() + 2, header.end());
    out.parameters.assign(n_params, Matrix(per_chain.size(), n_iters));
    std::size_t m = 0;
    for (const auto& [chain, params] : per_chain) {
        for (std::size_t p = 0; p < n_params; ++p)
            for (std::size_t n = 0; n < n_iters; ++n) out.parameters[p].at(m, n) = params[p][n];
        ++m;
    }
    out.check();
    return out;
}

// WIDE layout: one parameter per file, one column per chain.
inline DrawsMatrix read_draws_wide(std::istream& in, const std::string& param_name,
                                   char delim = ',', bool admit_nonfinite = false) {
    std::string line;
    std::vector<std::vector<double>> columns;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_line(line, delim);
        if (first) {
            first = false;
            // header row is optional; skip it when the first field is not numeric
            try {
                (void)detail::parse_double(fields[0], line_no, true);
            } catch (const ParseError&) {
                columns.resize(fields.size());
                continue;
            }
            columns.resize(fields.size());
        }
        if (fields.size() != columns.size())
            throw ParseError("wrong field count at line " + std::to_string(line_no));
        for (std::size_t m = 0; m < fields.size(); ++m)
            columns[m].push_back(detail::parse_double(fields[m], line_no, admit_nonfinite));
    }
    if (columns.empty() || columns.front().empty()) throw ParseError("no draws in input");

    DrawsMatrix out;
    out.parameter_names = {param_name};
    out.parameters.assign(1, Matrix(columns.size(), columns.front().size()));
    for (std::size_t m = 0; m < columns.size(); ++m)
        for (std::size_t n = 0; n < columns[m].size(); ++n) out.parameters[0].at(m, n) = columns[m][n];
    out.check();
    return out;
}

// LONG-layout writer; 17 significant digits so read_draws round-trips
// bit-exactly.
inline void write_draws_long(std::ostream& out, const DrawsMatrix& draws, char delim = ',') {
    draws.check();
    out << "chain" << delim << "draw";
    for (const auto& name : draws.parameter_names) out << delim << name;
    out << "\n";
    for (std::size_t m = 0; m < draws.chains(); ++m) {
        for (std::size_t n = 0; n < draws.iterations(); ++n) {
            out << (m + 1) << delim << (n + 1);
            for (const auto& p : draws.parameters)
                out << delim << detail::format_full_precision(p.at(m, n));
            out << "\n";
        }
    }
}

inline nlohmann::json report_to_json(const DiagnosticsReport& report) {
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json params = json::array();
    for (std::size_t p = 0; p < report.stats.size(); ++p) {
        const ChainStat& st = report.stats[p];
        json flags = json::array();
        for (Flag f : st.reliability_flags) flags.push_back(to_string(f));
        json quantiles = json::object();
        for (const auto& [q, v] : st.quantile_estimates)
            quantiles[detail::format_full_precision(q)] = num(v);
        params.push_back({{"name", report.parameter_names[p]},
                          {"rhat_classic", num(st.rhat_classic)},
                          {"rhat_rank", num(st.rhat_rank)},
                          {"rhat_folded", num(st.rhat_folded)},
                          {"rhat_max", num(st.rhat_max)},
                          {"ess_bulk", num(st.ess_bulk)},
                          {"ess_tail", num(st.ess_tail)},
                          {"ess_median", num(st.ess_median)},
                          {"ess_mad", num(st.ess_mad)},
                          {"ess_mean_classic", num(st.ess_mean_classic)},
                          {"ess_bda2", num(st.ess_bda2)},
                          {"mcse_mean", num(st.mcse_mean)},
                          {"mcse_median", num(st.mcse_median)},
                          {"quantiles", quantiles},
                          {"flags", flags}});
    }
    return json{{"schema_version", report_schema_version},
                {"tool_version", report.tool_version},
                {"timestamp", report.timestamp},
                {"chains", report.chains},
                {"iterations", report.iterations},
                {"config",
                 {{"rhat_threshold", report.config.rhat_threshold},
                  {"ess_threshold", report.config.ess_threshold},
                  {"min_ess_per_split_chain", report.config.min_ess_per_split_chain},
                  {"tail_quantiles",
                   {report.config.tail_quantiles.first, report.config.tail_quantiles.second}},
                  {"small_interval_count", report.config.small_interval_count},
                  {"mcse_sd_quantiles",
                   {report.config.mcse_sd_quantiles.first, report.config.mcse_sd_quantiles.second}},
                  {"ess_cap_enabled", report.config.ess_cap_enabled}}},
                {"parameters", params}};
}

// Fixed-width human-readable table; flagged parameters get a marker.
inline std::string report_to_table(const DiagnosticsReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-20s %10s %10s %10s %10s %10s  %s\n", "parameter",
                  "rhat_max", "ess_bulk", "ess_tail", "mcse_mean", "mcse_med", "flags");
    out += buf;
    auto cell = [](double v) {
        char b[32];
        if (std::isnan(v))
            std::snprintf(b, sizeof(b), "%10s", "nan");
        else
            std::snprintf(b, sizeof(b), "%10.4g", v);
        return std::string(b);
    };
    for (std::size_t p = 0; p < report.stats.size(); ++p) {
        const ChainStat& st = report.stats[p];
        std::string flags;
        for (Flag f : st.reliability_flags) {
            if (!flags.empty()) flags += ",";
            flags += to_string(f);
        }
        std::snprintf(buf, sizeof(buf), "%-20s %s %s %s %s %s %s %s\n",
                      report.parameter_names[p].c_str(), cell(st.rhat_max).c_str(),
                      cell(st.ess_bulk).c_str(), cell(st.ess_tail).c_str(),
                      cell(st.mcse_mean).c_str(), cell(st.mcse_median).c_str(),
                      st.reliability_flags.empty() ? " " : "!", flags.c_str());
        out += buf;
    }
    return out;
}

// One row per replication, for external plotting.
inline void sweep_to_csv(std::ostream& out, const SweepResult& sweep) {
    out << "replication,rhat_classic,rhat_rank,rhat_folded,rhat_max,rhat_unsplit,"
           "ess_bulk,ess_tail,ess_mean\n";
    for (const auto& r : sweep.records) {
        out << r.replication;
        for (double v : {r.rhat_classic, r.rhat_rank, r.rhat_folded, r.rhat_max, r.rhat_unsplit,
                         r.ess_bulk, r.ess_tail, r.ess_mean})
            out << "," << detail::format_full_precision(v);
        out << "\n";
    }
}

}  // namespace mcdiag
