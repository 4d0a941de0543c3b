// SPDX-License-Identifier: Apache-2.0
//
// Eve's USD + photon-number-splitting attack: conditional yields, the gains and
// errors Bob observes under attack, and the linear program that minimizes the
// single-photon signal yield while reproducing a normal channel's statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "decoyattack/channel_decoy.hpp"
#include "decoyattack/coherent_source.hpp"
#include "decoyattack/simplex.hpp"

namespace decoyattack {

/// Eve's measured discrimination quality.
///
/// q_*: probability of a conclusive outcome given the sent state.
/// xi_*: probability that a conclusive outcome names the sent state correctly.
struct UsdPerformance {
    double q_mu = 1.18e-3;
    double q_nu = 1.16e-3;
    double xi_mu = 0.9690;
    double xi_nu = 0.9837;

    void validate() const {
        auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!unit(q_mu) || !unit(q_nu) || !unit(xi_mu) || !unit(xi_nu))
            throw std::invalid_argument("UsdPerformance: all probabilities must lie in [0, 1]");
    }

    /// A perfect-identification attacker (xi = 1) succeeding with probability q on both states.
    static UsdPerformance ideal(double q) { return {q, q, 1.0, 1.0}; }

    friend bool operator==(const UsdPerformance&, const UsdPerformance&) = default;
};

enum class UsdCeiling { optimal, linear_optics };

/// Throws if q_mu or q_nu exceed the physical ceiling for this source.
inline void check_usd_ceiling(const UsdPerformance& usd, const SourceConfig& cfg,
                              UsdCeiling ceiling = UsdCeiling::linear_optics) {
    usd.validate();
    const double qmax = ceiling == UsdCeiling::optimal ? usd_success_optimal(cfg) : usd_success_linear_optics(cfg);
    constexpr double slack = 1e-12;
    if (usd.q_mu > qmax + slack || usd.q_nu > qmax + slack)
        throw std::invalid_argument("UsdPerformance: success probability exceeds the USD ceiling " +
                                    std::to_string(qmax));
}

/// Per-photon-number yields Eve applies after each conclusive outcome.
/// Index k holds photon number k + 1; Z_0 and all inconclusive-outcome yields are zero.
struct YieldPlan {
    unsigned n_trunc = 0;
    std::vector<double> z_mu;
    std::vector<double> z_nu;

    YieldPlan() = default;
    explicit YieldPlan(unsigned n, double fill = 0.0) : n_trunc(n), z_mu(n, fill), z_nu(n, fill) {}

    double mu_yield(unsigned photons) const { return photons == 0 || photons > n_trunc ? 0.0 : z_mu[photons - 1]; }
    double nu_yield(unsigned photons) const { return photons == 0 || photons > n_trunc ? 0.0 : z_nu[photons - 1]; }

    void validate() const {
        if (n_trunc < 1) throw std::invalid_argument("YieldPlan: truncation must be >= 1");
        if (z_mu.size() != n_trunc || z_nu.size() != n_trunc)
            throw std::invalid_argument("YieldPlan: vector lengths must equal the truncation");
        for (std::size_t k = 0; k < n_trunc; ++k)
            if (!(z_mu[k] >= 0.0 && z_mu[k] <= 1.0 && z_nu[k] >= 0.0 && z_nu[k] <= 1.0))
                throw std::invalid_argument("YieldPlan: yield at photon number " + std::to_string(k + 1) +
                                            " outside [0, 1]");
    }
};

/// Bob's effective yields Y_i^s, Y_i^d, indexed by photon number 0..N.
struct AttackYields {
    std::vector<double> signal;
    std::vector<double> decoy;
};

inline AttackYields yields_from_plan(const UsdPerformance& usd, const YieldPlan& plan) {
    plan.validate();
    AttackYields y{std::vector<double>(plan.n_trunc + 1, 0.0), std::vector<double>(plan.n_trunc + 1, 0.0)};
    for (unsigned i = 1; i <= plan.n_trunc; ++i) {
        y.signal[i] = usd.q_mu * (usd.xi_mu * plan.mu_yield(i) + (1.0 - usd.xi_mu) * plan.nu_yield(i));
        y.decoy[i] = usd.q_nu * (usd.xi_nu * plan.nu_yield(i) + (1.0 - usd.xi_nu) * plan.mu_yield(i));
    }
    return y;
}

/// Gains and error contributions Bob sees under the attack. A pulse forwarded after a
/// wrong identification errs with probability 1/2; correctly identified pulses add none.
inline GainStats attack_gains(const SourceConfig& cfg, const UsdPerformance& usd, const YieldPlan& plan) {
    const AttackYields y = yields_from_plan(usd, plan);
    GainStats g;
    for (unsigned i = 1; i <= plan.n_trunc; ++i) {
        const double ps = poisson_pmf(cfg.mu(), i);
        const double pd = poisson_pmf(cfg.nu(), i);
        g.q_mu_gain += y.signal[i] * ps;
        g.q_nu_gain += y.decoy[i] * pd;
        g.emu_qmu += 0.5 * usd.q_mu * (1.0 - usd.xi_mu) * plan.nu_yield(i) * ps;
        g.enu_qnu += 0.5 * usd.q_nu * (1.0 - usd.xi_nu) * plan.mu_yield(i) * pd;
    }
    return g;
}

/// R^u = Y_1^s mu e^{-mu}.
inline double key_rate_upper(const SourceConfig& cfg, double y1_signal) {
    if (!(y1_signal >= 0.0 && y1_signal <= 1.0))
        throw std::invalid_argument("key_rate_upper: single-photon yield must be in [0, 1]");
    return y1_signal * cfg.mu() * std::exp(-cfg.mu());
}

inline constexpr unsigned default_photon_truncation = 20;

/// Builds the attack LP over x = (Z_1^mu..Z_N^mu, Z_1^nu..Z_N^nu) for raw intensities.
/// Intensities are not required to differ, so relabeling symmetries can be probed.
inline lp::LinearProgram attack_program(double mu, double nu, const UsdPerformance& usd, const GainStats& targets,
                                        unsigned n_trunc, bool enforce_errors) {
    const std::size_t n = n_trunc;
    lp::LinearProgram prog;
    prog.objective.assign(2 * n, 0.0);
    prog.objective[0] = usd.q_mu * usd.xi_mu;
    prog.objective[n] = usd.q_mu * (1.0 - usd.xi_mu);

    std::vector<double> gain_mu(2 * n, 0.0), gain_nu(2 * n, 0.0), err_mu(2 * n, 0.0), err_nu(2 * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const unsigned i = static_cast<unsigned>(k + 1);
        const double ps = poisson_pmf(mu, i);
        const double pd = poisson_pmf(nu, i);
        gain_mu[k] = usd.q_mu * usd.xi_mu * ps;
        gain_mu[n + k] = usd.q_mu * (1.0 - usd.xi_mu) * ps;
        gain_nu[n + k] = usd.q_nu * usd.xi_nu * pd;
        gain_nu[k] = usd.q_nu * (1.0 - usd.xi_nu) * pd;
        err_mu[n + k] = 0.5 * usd.q_mu * (1.0 - usd.xi_mu) * ps;
        err_nu[k] = 0.5 * usd.q_nu * (1.0 - usd.xi_nu) * pd;
    }
    prog.eq_rows = {gain_mu, gain_nu};
    prog.eq_rhs = {targets.q_mu_gain, targets.q_nu_gain};
    if (enforce_errors) {
        prog.le_rows = {err_mu, err_nu};
        prog.le_rhs = {targets.emu_qmu, targets.enu_qnu};
    }
    prog.upper.assign(2 * n, 1.0);
    return prog;
}

struct ConstraintResiduals {
    double gain_equality = 0.0;     ///< max |achieved - target| over both gains
    double error_inequality = 0.0;  ///< max (achieved - allowed) over both error terms; <= 0 when satisfied
    double bound = 0.0;             ///< max distance of an unclamped yield outside [0, 1]
};

struct AttackSolution {
    YieldPlan plan;
    double y1_signal = 0.0;
    double rate_upper = 0.0;
    bool feasible = false;
    bool truncation_warning = false;  ///< Poisson tail beyond N above 1e-12
    GainStats targets;
    GainStats achieved;
    ConstraintResiduals residuals;
};

/// Eve's cheapest plan (minimal Y_1^s) reproducing the normal-channel gains, and optionally
/// keeping her induced errors at or below the normal-channel error terms.
/// Infeasibility is a regular outcome, reported through `feasible`.
inline AttackSolution optimize_yields(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch,
                                      unsigned n_trunc = default_photon_truncation, bool enforce_errors = false) {
    usd.validate();
    if (n_trunc < 1) throw std::invalid_argument("optimize_yields: truncation must be >= 1");

    AttackSolution out;
    out.targets = normal_gains(cfg, ch);
    out.truncation_warning = poisson_tail(cfg.mu(), n_trunc) > 1e-12;
    out.plan = YieldPlan(n_trunc);

    const lp::LinearProgram prog = attack_program(cfg.mu(), cfg.nu(), usd, out.targets, n_trunc, enforce_errors);
    const lp::LpSolution sol = lp::solve(prog);
    if (sol.status != lp::LpStatus::optimal) return out;

    for (unsigned k = 0; k < n_trunc; ++k) {
        out.plan.z_mu[k] = sol.x[k];
        out.plan.z_nu[k] = sol.x[n_trunc + k];
    }
    for (double v : sol.x_raw) out.residuals.bound = std::max({out.residuals.bound, -v, v - 1.0});

    out.achieved = attack_gains(cfg, usd, out.plan);
    out.residuals.gain_equality = std::max(std::abs(out.achieved.q_mu_gain - out.targets.q_mu_gain),
                                           std::abs(out.achieved.q_nu_gain - out.targets.q_nu_gain));
    out.residuals.error_inequality = std::max(out.achieved.emu_qmu - out.targets.emu_qmu,
                                              out.achieved.enu_qnu - out.targets.enu_qnu);
    out.y1_signal = std::clamp(yields_from_plan(usd, out.plan).signal[1], 0.0, 1.0);
    out.rate_upper = key_rate_upper(cfg, out.y1_signal);
    out.feasible = true;
    return out;
}

}  // namespace decoyattack
