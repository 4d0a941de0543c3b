// SPDX-License-Identifier: Apache-2.0
//
// decoyattack: command-line front end.
//
//   decoyattack usd|bounds|sweep|crossover|region|simulate|stability [--config file] [--set key=value]... [--out file]
//
// Exit codes: 0 success, 1 usage or validation error, 2 computation error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "decoyattack/decoyattack.hpp"

namespace {

using namespace decoyattack;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_compute = 2;

constexpr const char* config_env_var = "DECOYATTACK_CONFIG";

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig load_config(const CommonArgs& args) {
    std::string path = args.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(config_env_var)) path = env;
    }
    return path.empty() ? parse_config("", args.overrides) : parse_config_file(path, args.overrides);
}

/// Sends `body` to --out when given, otherwise to stdout. Called only after the
/// computation succeeded, so failures never leave partial files.
void emit(const CommonArgs& args, const std::string& body) {
    if (args.out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(args.out_path, std::ios::binary);
    if (!f) throw UsageError("cannot open output file '" + args.out_path + "'");
    f << body;
}

std::string cmd_usd(const RunConfig& rc) {
    const SourceConfig cfg = rc.source_config();
    std::ostringstream out;
    write_key_value(out, "relative_phase", cfg.relative_phase(), "%.6f");
    write_key_value(out, "p_f", failure_probability(cfg), "%.6f");
    write_key_value(out, "q_opt", usd_success_optimal(cfg), "%.6f");
    write_key_value(out, "q_max", usd_success_linear_optics(cfg), "%.6f");
    return out.str();
}

std::string cmd_bounds(const RunConfig& rc) {
    const SourceConfig cfg = rc.source_config();
    const ChannelParams ch = rc.channel_params();
    const GainStats g = normal_gains(cfg, ch);
    const DecoyEstimates d = decoy_estimates(cfg, g);
    const AttackSolution sol =
        optimize_yields(cfg, rc.usd_performance(), ch, rc.solver.n_trunc, rc.solver.enforce_errors);
    const double r_lower = key_rate_lower(cfg, g, d);

    std::ostringstream out;
    write_key_value(out, "loss_db", rc.loss_db(), "%.4f");
    write_key_value(out, "link_loss_db", rc.link_loss_db(), "%.4f");
    write_key_value(out, "eta", ch.eta);
    write_key_value(out, "q_mu_gain", g.q_mu_gain);
    write_key_value(out, "q_nu_gain", g.q_nu_gain);
    write_key_value(out, "y1_lower", d.y1_lower);
    write_key_value(out, "e1_upper", d.e1_upper);
    write_key_value(out, "r_lower", r_lower);
    out << "feasible=" << (sol.feasible ? 1 : 0) << '\n';
    if (sol.feasible) {
        write_key_value(out, "y1_signal", sol.y1_signal);
        write_key_value(out, "r_upper", sol.rate_upper);
    } else {
        out << "y1_signal=\nr_upper=\n";
    }
    const bool success = sol.feasible && r_lower > sol.rate_upper && r_lower > 0.0;
    out << "attack_success=" << (success ? 1 : 0) << '\n';
    return out.str();
}

std::string cmd_sweep(const RunConfig& rc) {
    const auto rows = sweep(rc.source_config(), rc.usd_performance(), rc.channel_params(), rc.sweep_range(),
                            rc.analysis_options());
    std::ostringstream out;
    write_sweep_csv(out, rows);
    return out.str();
}

std::string cmd_crossover(const RunConfig& rc) {
    const double x = locate_crossover(rc.source_config(), rc.usd_performance(), rc.channel_params(),
                                      rc.sweep_range(), rc.analysis_options());
    std::ostringstream out;
    write_key_value(out, "crossover_db", x, "%.2f");
    return out.str();
}

std::string cmd_region(const RunConfig& rc) {
    const SuccessRegion r = success_region(rc.source_config(), rc.usd_performance(), rc.channel_params(),
                                           rc.sweep_range(), rc.analysis_options());
    std::ostringstream out;
    write_key_value(out, "lower_db", r.lower_db, "%.2f");
    out << "upper_db=" << (r.upper_db ? format_number(*r.upper_db, "%.2f") : std::string{}) << '\n';
    out << "closed_by=" << to_string(r.closed_by) << '\n';
    out << "abort_db=" << (r.abort_db ? format_number(*r.abort_db, "%.2f") : std::string{}) << '\n';
    return out.str();
}

std::string cmd_simulate(const RunConfig& rc) {
    const SourceConfig cfg = rc.source_config();
    const UsdPerformance usd = rc.usd_performance();
    const AttackSolution sol = optimize_yields(cfg, usd, rc.channel_params(), rc.solver.n_trunc, rc.solver.enforce_errors);
    if (!sol.feasible)
        throw AnalysisError(AnalysisError::Kind::infeasible_endpoint,
                            "simulate: attack cannot reproduce the channel statistics at this loss");

    const EmpiricalStats s = run_trials({rc.mc.n_pulses, rc.mc.seed, cfg, usd, sol.plan});
    const GainStats analytic = attack_gains(cfg, usd, sol.plan);

    std::ostringstream out;
    write_key_value(out, "loss_db", rc.loss_db(), "%.4f");
    out << "n_pulses=" << rc.mc.n_pulses << "\nseed=" << rc.mc.seed << '\n';
    write_estimate(out, "q_mu_hat", s.q_mu_hat);
    write_estimate(out, "q_nu_hat", s.q_nu_hat);
    write_estimate(out, "xi_mu_hat", s.xi_mu_hat);
    write_estimate(out, "xi_nu_hat", s.xi_nu_hat);
    write_estimate(out, "gain_mu_hat", s.gain_mu_hat);
    write_estimate(out, "gain_nu_hat", s.gain_nu_hat);
    write_estimate(out, "error_gain_mu_hat", s.error_gain_mu_hat);
    write_estimate(out, "error_gain_nu_hat", s.error_gain_nu_hat);

    // z-scores use the analytic proportion's standard error, so zero observed events
    // against a tiny expected rate stay finite.
    auto residual = [&](const std::string& name, const Estimate& e, double expected, std::uint64_t n) {
        write_key_value(out, name + "_analytic", expected);
        const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
        const double z = se > 0.0 ? (e.value - expected) / se : 0.0;
        write_key_value(out, name + "_z", z, "%.4f");
    };
    residual("gain_mu", s.gain_mu_hat, analytic.q_mu_gain, s.counts.sent[0]);
    residual("gain_nu", s.gain_nu_hat, analytic.q_nu_gain, s.counts.sent[1]);
    residual("error_gain_mu", s.error_gain_mu_hat, analytic.emu_qmu, s.counts.sent[0]);
    residual("error_gain_nu", s.error_gain_nu_hat, analytic.enu_qnu, s.counts.sent[1]);
    out << "forwarded_inconclusive=" << s.counts.forwarded_inconclusive << '\n';
    return out.str();
}

std::string cmd_stability(const std::string& input, const std::vector<std::string>& max_std) {
    std::array<double, 4> thresholds;
    thresholds.fill(std::numeric_limits<double>::infinity());
    for (const auto& entry : max_std) {
        const auto eq = entry.find('=');
        bool matched = false;
        for (std::size_t c = 0; c < 4 && eq != std::string::npos; ++c) {
            if (entry.substr(0, eq) == stability_columns[c]) {
                try {
                    thresholds[c] = std::stod(entry.substr(eq + 1));
                } catch (const std::exception&) {
                    throw UsageError("--max-std: bad value in '" + entry + "'");
                }
                matched = true;
            }
        }
        if (!matched) throw UsageError("--max-std expects column=value with column in q_mu,q_nu,xi_mu,xi_nu");
    }
    std::ifstream in(input);
    if (!in) throw UsageError("cannot open stability series '" + input + "'");
    const auto rows = parse_stability_csv(in);
    const StabilitySummary summary = ingest_stability_series(rows, thresholds);

    std::ostringstream out;
    out << "rows=" << summary.rows << '\n';
    for (const auto& c : summary.columns) {
        write_key_value(out, c.name + "_mean", c.mean);
        write_key_value(out, c.name + "_std", c.stddev);
        out << c.name << "_flagged=" << (c.flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

void add_common(CLI::App* sub, CommonArgs& args, bool with_out) {
    sub->add_option("--config", args.config_path, std::string("JSON config file (default: $") + config_env_var + ")");
    sub->add_option("--set", args.overrides, "override a field, e.g. --set source.mu=0.4")->take_all();
    if (with_out) sub->add_option("--out", args.out_path, "write results to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoy-state QKD without phase randomization: USD+PNS attack analysis"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string stability_input;
    std::vector<std::string> max_std;

    struct Command {
        const char* name;
        const char* help;
        std::function<std::string(const RunConfig&)> run;
    };
    const std::vector<Command> commands = {
        {"usd", "USD success probabilities (optimal and linear optics) and failure probability", cmd_usd},
        {"bounds", "believed lower bound and attack upper bound at one loss", cmd_bounds},
        {"sweep", "CSV of both bounds over the configured loss range", cmd_sweep},
        {"crossover", "loss where the lower and upper bounds cross", cmd_crossover},
        {"region", "loss interval in which the attack succeeds", cmd_region},
        {"simulate", "Monte Carlo run of the optimized attack versus the analytic gains", cmd_simulate},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, args, true);
        subs.emplace_back(sub, &c);
    }
    auto* stability = app.add_subcommand("stability", "mean and spread of a measured t,q_mu,q_nu,xi_mu,xi_nu series");
    stability->add_option("--input", stability_input, "CSV file")->required();
    stability->add_option("--max-std", max_std, "flag a column, e.g. --max-std q_mu=5e-5")->take_all();
    stability->add_option("--out", args.out_path, "write results to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (stability->parsed()) {
            emit(args, cmd_stability(stability_input, max_std));
            return exit_ok;
        }
        for (const auto& [sub, cmd] : subs) {
            if (!sub->parsed()) continue;
            const RunConfig rc = load_config(args);
            emit(args, cmd->run(rc));
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const StabilityDataError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return exit_usage;
    } catch (const AnalysisError& e) {
        std::cerr << "computation error: " << e.what() << '\n';
        return e.kind() == AnalysisError::Kind::bad_range ? exit_usage : exit_compute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_compute;
    }
    return exit_usage;
}
