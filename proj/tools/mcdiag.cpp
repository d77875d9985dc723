// Command-line surface: diagnose draws files, run simulated-scenario
// sweeps, and emit diagnostic plots.
//
// Exit codes: 0 success, 1 usage error, 2 data error,
// 3 diagnostics exceeded thresholds (CI-gate semantics).

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcdiag/mcdiag.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_threshold = 3;

std::size_t default_threads() {
    if (const char* env = std::getenv("MCDIAG_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

mcdiag::DrawsMatrix load_draws(const std::string& path, const std::string& format,
                               const std::string& param_name, bool admit_nonfinite) {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (path != "-") {
        file.open(path);
        if (!file) throw mcdiag::ParseError("cannot open file: " + path);
        in = &file;
    }
    if (format == "wide")
        return mcdiag::read_draws_wide(*in, param_name.empty() ? "theta" : param_name, ',',
                                       admit_nonfinite);
    return mcdiag::read_draws_long(*in, ',', admit_nonfinite);
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

mcdiag::Manipulation parse_manipulation(const std::string& text) {
    // grammar: kind:value[:chain], kind in {none, trend, shift, scale}
    mcdiag::Manipulation manip;
    if (text.empty() || text == "none") return manip;
    std::stringstream ss(text);
    std::string kind, value, chain;
    std::getline(ss, kind, ':');
    std::getline(ss, value, ':');
    std::getline(ss, chain, ':');
    if (kind == "trend")
        manip.kind = mcdiag::ManipulationKind::Trend;
    else if (kind == "shift")
        manip.kind = mcdiag::ManipulationKind::Shift;
    else if (kind == "scale")
        manip.kind = mcdiag::ManipulationKind::Scale;
    else
        throw CLI::ValidationError("--manipulation", "unknown kind '" + kind + "'");
    if (value.empty()) throw CLI::ValidationError("--manipulation", "missing value");
    manip.value = std::stod(value);
    if (!chain.empty()) manip.chain_index = static_cast<std::size_t>(std::stoul(chain));
    return manip;
}

int run_diagnose(const std::string& path, const std::string& format,
                 const std::string& param_name, const std::vector<std::string>& params,
                 double rhat_threshold, double ess_threshold, const std::string& out_path,
                 bool as_json, bool admit_nonfinite) {
    mcdiag::DrawsMatrix draws;
    try {
        draws = load_draws(path, format, param_name, admit_nonfinite);
        if (!params.empty()) {
            mcdiag::DrawsMatrix filtered;
            for (const auto& want : params) {
                const auto it = std::find(draws.parameter_names.begin(),
                                          draws.parameter_names.end(), want);
                if (it == draws.parameter_names.end())
                    throw mcdiag::ParseError("unknown parameter '" + want + "'");
                const auto idx =
                    static_cast<std::size_t>(it - draws.parameter_names.begin());
                filtered.parameter_names.push_back(want);
                filtered.parameters.push_back(draws.parameters[idx]);
            }
            draws = std::move(filtered);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }

    mcdiag::DiagnosticConfig config;
    config.rhat_threshold = rhat_threshold;
    config.ess_threshold = ess_threshold;

    mcdiag::DiagnosticsReport report;
    try {
        report = mcdiag::analyze(draws, config, default_threads());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    report.timestamp = iso_timestamp();

    const std::string rendered =
        as_json ? mcdiag::report_to_json(report).dump(2) + "\n" : mcdiag::report_to_table(report);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return exit_data;
        }
        out << rendered;
    }

    bool violated = false;
    for (std::size_t p = 0; p < report.stats.size(); ++p) {
        const auto& st = report.stats[p];
        if (st.rhat_max > config.rhat_threshold || st.ess_bulk < config.ess_threshold ||
            st.ess_tail < config.ess_threshold) {
            std::cerr << "threshold violation: " << report.parameter_names[p]
                      << " (rhat_max=" << st.rhat_max << ", ess_bulk=" << st.ess_bulk
                      << ", ess_tail=" << st.ess_tail << ")\n";
            violated = true;
        }
    }
    return violated ? exit_threshold : exit_ok;
}

int run_simulate(const std::string& scenario, double rho, std::size_t chains, std::size_t iters,
                 std::size_t replications, std::uint64_t seed, const std::string& manipulation,
                 const std::string& out_path, const std::string& draws_out) {
    mcdiag::ScenarioSpec spec;
    if (scenario == "iid")
        spec.process = mcdiag::Process::IidNormal;
    else if (scenario == "ar1")
        spec.process = mcdiag::Process::Ar1;
    else if (scenario == "cauchy")
        spec.process = mcdiag::Process::CauchyRatio;
    spec.rho = rho;
    spec.chains = chains;
    spec.iterations = iters;
    spec.replications = replications;
    spec.seed = seed;
    spec.manipulation = parse_manipulation(manipulation);

    mcdiag::SweepResult sweep;
    try {
        sweep = mcdiag::run_sweep(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return exit_data;
        }
        mcdiag::sweep_to_csv(out, sweep);
    } else {
        mcdiag::sweep_to_csv(std::cout, sweep);
    }

    if (!draws_out.empty()) {
        // one replication's chains as a LONG draws file, for piping into diagnose
        mcdiag::DrawsMatrix draws;
        draws.parameter_names = {"theta"};
        draws.parameters = {mcdiag::generate_chains(spec, 0)};
        std::ofstream out(draws_out);
        if (!out) {
            std::cerr << "error: cannot write " << draws_out << "\n";
            return exit_data;
        }
        mcdiag::write_draws_long(out, draws);
    }

    auto median = [&](double mcdiag::ReplicationRecord::*f) {
        return mcdiag::sweep_median(sweep, f);
    };
    std::cerr << "medians over " << replications
              << " replications: rhat_classic=" << median(&mcdiag::ReplicationRecord::rhat_classic)
              << " rhat_rank=" << median(&mcdiag::ReplicationRecord::rhat_rank)
              << " rhat_folded=" << median(&mcdiag::ReplicationRecord::rhat_folded)
              << " rhat_max=" << median(&mcdiag::ReplicationRecord::rhat_max)
              << " ess_bulk=" << median(&mcdiag::ReplicationRecord::ess_bulk)
              << " ess_tail=" << median(&mcdiag::ReplicationRecord::ess_tail) << "\n";
    return exit_ok;
}

int run_plot(const std::string& path, const std::string& format, const std::string& param,
             const std::string& kind, std::size_t bins, std::size_t intervals,
             const std::string& out_path, bool ascii, bool admit_nonfinite) {
    mcdiag::DrawsMatrix draws;
    try {
        draws = load_draws(path, format, param, admit_nonfinite);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }

    const auto it =
        std::find(draws.parameter_names.begin(), draws.parameter_names.end(), param);
    if (it == draws.parameter_names.end()) {
        std::cerr << "error: unknown parameter '" << param << "'; available:";
        for (const auto& n : draws.parameter_names) std::cerr << " " << n;
        std::cerr << "\n";
        return exit_data;
    }
    const mcdiag::Matrix& m =
        draws.parameters[static_cast<std::size_t>(it - draws.parameter_names.begin())];

    std::string rendered;
    try {
        if (ascii) {
            std::vector<std::string> labels;
            std::vector<double> values;
            if (kind == "rank") {
                const auto data = mcdiag::rank_plot_data(m, bins);
                for (std::size_t c = 0; c < data.histograms.size(); ++c)
                    for (std::size_t b = 0; b < data.bins; ++b) {
                        labels.push_back("c" + std::to_string(c + 1) + " b" + std::to_string(b + 1));
                        values.push_back(data.histograms[c][b]);
                    }
            } else if (kind == "quantile-ess") {
                for (double q : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
                    labels.push_back("q=" + std::to_string(q).substr(0, 4));
                    values.push_back(mcdiag::ess_quantile(m, q).ess);
                }
            } else if (kind == "local-ess") {
                const auto res = mcdiag::ess_local(m, intervals);
                for (std::size_t i = 0; i < res.size(); ++i) {
                    labels.push_back("int " + std::to_string(i + 1));
                    values.push_back(res[i].ess);
                }
            } else {  // ess-evolution
                std::vector<std::size_t> grid;
                for (std::size_t i = 1; i <= 10; ++i) grid.push_back(m.iters * i / 10);
                const auto pts = mcdiag::ess_evolution(m, grid);
                for (const auto& p : pts) {
                    labels.push_back("S=" + std::to_string(p.prefix));
                    values.push_back(p.bulk);
                }
            }
            rendered = mcdiag::ascii_bar_chart(labels, values);
        } else if (kind == "rank") {
            rendered = mcdiag::rank_plot(m, param, bins);
        } else if (kind == "quantile-ess") {
            rendered = mcdiag::quantile_ess_plot(m, param, mcdiag::default_quantile_grid());
        } else if (kind == "local-ess") {
            rendered = mcdiag::local_ess_plot(m, param, intervals);
        } else {  // ess-evolution
            std::vector<std::size_t> grid;
            for (std::size_t i = 1; i <= 10; ++i) grid.push_back(m.iters * i / 10);
            rendered = mcdiag::ess_evolution_plot(m, param, grid);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }

    std::string target = out_path;
    if (target.empty()) target = param + "_" + kind + (ascii ? ".txt" : ".svg");
    std::ofstream out(target);
    if (!out) {
        std::cerr << "error: cannot write " << target << "\n";
        return exit_data;
    }
    out << rendered;
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MCMC convergence diagnostics: rank-normalized split-Rhat, "
                 "bulk/tail ESS, quantile MCSE, scenario sweeps, and plots"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mcdiag::version_string);

    // diagnose
    std::string d_file, d_format = "long", d_param_name, d_out;
    std::vector<std::string> d_params;
    double d_rhat = 1.01, d_ess = 400.0;
    bool d_json = false, d_nonfinite = false;
    auto* diagnose = app.add_subcommand("diagnose", "compute diagnostics for a draws file");
    diagnose->add_option("file", d_file, "draws CSV ('-' for stdin)")->required();
    diagnose->add_option("--format", d_format, "input layout")
        ->check(CLI::IsMember({"long", "wide"}));
    diagnose->add_option("--param-name", d_param_name, "parameter name for wide layout");
    diagnose->add_option("--params", d_params, "restrict to these parameters")->delimiter(',');
    diagnose->add_option("--rhat-threshold", d_rhat, "Rhat gate (default 1.01)");
    diagnose->add_option("--ess-threshold", d_ess, "ESS gate (default 400)");
    diagnose->add_option("--out", d_out, "write report here instead of stdout");
    diagnose->add_flag("--json", d_json, "emit JSON instead of the table");
    diagnose->add_flag("--admit-nonfinite", d_nonfinite, "accept non-finite draws");

    // simulate
    std::string s_scenario = "iid", s_manip = "none", s_out, s_draws_out;
    double s_rho = 0.3;
    std::size_t s_chains = 4, s_iters = 1000, s_reps = 200;
    std::uint64_t s_seed = 0;
    auto* simulate = app.add_subcommand("simulate", "run a replicated scenario sweep");
    simulate->add_option("--scenario", s_scenario, "process")
        ->check(CLI::IsMember({"iid", "ar1", "cauchy"}));
    simulate->add_option("--rho", s_rho, "AR(1) coefficient");
    simulate->add_option("--chains", s_chains, "chains per replication");
    simulate->add_option("--iters", s_iters, "iterations per chain");
    simulate->add_option("--replications", s_reps, "replication count");
    simulate->add_option("--seed", s_seed, "base seed");
    simulate->add_option("--manipulation", s_manip,
                         "kind:value[:chain], kind in {none, trend, shift, scale}; trend value is "
                         "the variance fraction, shift the offset, scale the SD factor");
    simulate->add_option("--out", s_out, "per-replication CSV path (default stdout)");
    simulate->add_option("--draws-out", s_draws_out, "also write replication 0's draws (LONG CSV)");

    // plot
    std::string p_file, p_format = "long", p_param, p_kind, p_out;
    std::size_t p_bins = 20, p_intervals = 20;
    bool p_ascii = false, p_nonfinite = false;
    auto* plot = app.add_subcommand("plot", "emit a diagnostic plot as SVG");
    plot->add_option("file", p_file, "draws CSV ('-' for stdin)")->required();
    plot->add_option("--format", p_format, "input layout")->check(CLI::IsMember({"long", "wide"}));
    plot->add_option("--param", p_param, "parameter to plot")->required();
    plot->add_option("--kind", p_kind, "plot kind")
        ->required()
        ->check(CLI::IsMember({"rank", "quantile-ess", "local-ess", "ess-evolution"}));
    plot->add_option("--bins", p_bins, "rank plot bin count");
    plot->add_option("--intervals", p_intervals, "small-interval count");
    plot->add_option("--out", p_out, "output path (default <param>_<kind>.svg)");
    plot->add_flag("--ascii", p_ascii, "terminal bar-chart fallback");
    plot->add_flag("--admit-nonfinite", p_nonfinite, "accept non-finite draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (diagnose->parsed())
        return run_diagnose(d_file, d_format, d_param_name, d_params, d_rhat, d_ess, d_out, d_json,
                            d_nonfinite);
    if (simulate->parsed())
        return run_simulate(s_scenario, s_rho, s_chains, s_iters, s_reps, s_seed, s_manip, s_out,
                            s_draws_out);
    return run_plot(p_file, p_format, p_param, p_kind, p_bins, p_intervals, p_out, p_ascii,
                    p_nonfinite);
}
