// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for the test suites. Nothing here calls into
// the library's implementation paths: formulas are written out straight-line in
// long double, and the LP is checked by exhaustive grid search.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

using real = long double;

inline real pmf(real mean, int i) {
    real f = 1.0L;
    for (int k = 2; k <= i; ++k) f *= k;
    return std::pow(mean, static_cast<real>(i)) * std::exp(-mean) / f;
}

inline real entropy(real e) {
    if (e <= 0.0L || e >= 1.0L) return 0.0L;
    return -e * std::log2(e) - (1.0L - e) * std::log2(1.0L - e);
}

struct Channel {
    real mu, nu, eta, y0, ed;
    bool background_in_gain = true;
};

struct OneDecoy {
    real q_mu, q_nu, eq_mu, y1, e1_raw, e1, rate;
};

/// Normal-channel gains, one-decoy Y1/e1 bounds and the believed key rate, straight-line.
inline OneDecoy one_decoy(const Channel& c) {
    OneDecoy o{};
    const real bg = c.background_in_gain ? c.y0 : 0.0L;
    o.q_mu = bg + (1.0L - std::exp(-c.eta * c.mu));
    o.q_nu = bg + (1.0L - std::exp(-c.eta * c.nu));
    o.eq_mu = 0.5L * c.y0 + c.ed * (1.0L - std::exp(-c.eta * c.mu));
    real y1 = c.mu / (c.mu * c.nu - c.nu * c.nu) *
              (o.q_nu * std::exp(c.nu) - o.q_mu * std::exp(c.mu) * c.nu * c.nu / (c.mu * c.mu) -
               o.eq_mu * std::exp(c.mu) * (c.mu * c.mu - c.nu * c.nu) / (0.5L * c.mu * c.mu));
    if (y1 < 0.0L) y1 = 0.0L;
    if (y1 > 1.0L) y1 = 1.0L;
    o.y1 = y1;
    if (y1 > 0.0L) {
        o.e1_raw = o.eq_mu * std::exp(c.mu) / (y1 * c.mu);
        o.e1 = std::min(o.e1_raw, 0.5L);
    } else {
        o.e1_raw = std::numeric_limits<real>::infinity();
        o.e1 = 0.5L;
    }
    real e_mu = o.eq_mu / o.q_mu;
    if (e_mu > 0.5L) e_mu = 0.5L;
    o.rate = -o.q_mu * entropy(e_mu) + y1 * c.mu * std::exp(-c.mu) * (1.0L - entropy(o.e1));
    return o;
}

struct Usd {
    real q_mu, q_nu, xi_mu, xi_nu;
};

struct Gains {
    real q_mu = 0, q_nu = 0, eq_mu = 0, eq_nu = 0;
};

/// Attack gains by explicit enumeration over photon number and POVM outcome.
inline Gains attack_gains(real mu, real nu, const Usd& u, const std::vector<double>& z_mu,
                          const std::vector<double>& z_nu) {
    Gains g;
    for (std::size_t k = 0; k < z_mu.size(); ++k) {
        const int i = static_cast<int>(k + 1);
        // Sent signal: outcome E_mu w.p. q xi, E_nu w.p. q (1 - xi).
        const real ps = pmf(mu, i);
        g.q_mu += ps * (u.q_mu * u.xi_mu * z_mu[k]);
        g.q_mu += ps * (u.q_mu * (1 - u.xi_mu) * z_nu[k]);
        g.eq_mu += ps * (u.q_mu * (1 - u.xi_mu) * z_nu[k]) * 0.5L;
        const real pd = pmf(nu, i);
        g.q_nu += pd * (u.q_nu * u.xi_nu * z_nu[k]);
        g.q_nu += pd * (u.q_nu * (1 - u.xi_nu) * z_mu[k]);
        g.eq_nu += pd * (u.q_nu * (1 - u.xi_nu) * z_mu[k]) * 0.5L;
    }
    return g;
}

/// Exhaustive search over Z in {0, h, ..., 1}^6 for N = 3 photon numbers.
struct GridResult {
    double best = std::numeric_limits<double>::infinity();  ///< min objective over slack-feasible points
    std::size_t feasible_points = 0;
    double min_excess = std::numeric_limits<double>::infinity();  ///< min over feasible of (objective - reference)
};

/// Slack-feasible: each gain within h * (sum of its coefficients) of the target.
inline GridResult grid_search_n3(double mu, double nu, const Usd& u, double target_mu, double target_nu, double h,
                                 double reference) {
    constexpr int n = 3;
    std::array<double, 2 * n> a_mu{}, a_nu{};
    for (int k = 0; k < n; ++k) {
        const double ps = static_cast<double>(pmf(mu, k + 1));
        const double pd = static_cast<double>(pmf(nu, k + 1));
        a_mu[k] = static_cast<double>(u.q_mu * u.xi_mu) * ps;
        a_mu[n + k] = static_cast<double>(u.q_mu * (1 - u.xi_mu)) * ps;
        a_nu[n + k] = static_cast<double>(u.q_nu * u.xi_nu) * pd;
        a_nu[k] = static_cast<double>(u.q_nu * (1 - u.xi_nu)) * pd;
    }
    double slack_mu = 0, slack_nu = 0;
    for (int j = 0; j < 2 * n; ++j) {
        slack_mu += a_mu[j];
        slack_nu += a_nu[j];
    }
    slack_mu *= h;
    slack_nu *= h;
    const double c0 = static_cast<double>(u.q_mu * u.xi_mu);
    const double c3 = static_cast<double>(u.q_mu * (1 - u.xi_mu));

    const int steps = static_cast<int>(std::lround(1.0 / h));
    std::vector<double> g(steps + 1);
    for (int s = 0; s <= steps; ++s) g[s] = s * h;

    GridResult r;
    std::array<double, 2 * n> z{};
    for (int i0 = 0; i0 <= steps; ++i0)
        for (int i1 = 0; i1 <= steps; ++i1)
            for (int i2 = 0; i2 <= steps; ++i2)
                for (int i3 = 0; i3 <= steps; ++i3) {
                    z = {g[i0], g[i1], g[i2], g[i3], 0, 0};
                    const double pm = a_mu[0] * z[0] + a_mu[1] * z[1] + a_mu[2] * z[2] + a_mu[3] * z[3];
                    const double pn = a_nu[0] * z[0] + a_nu[1] * z[1] + a_nu[2] * z[2] + a_nu[3] * z[3];
                    const double obj = c0 * z[0] + c3 * z[3];
                    for (int i4 = 0; i4 <= steps; ++i4) {
                        const double qm4 = pm + a_mu[4] * g[i4];
                        const double qn4 = pn + a_nu[4] * g[i4];
                        for (int i5 = 0; i5 <= steps; ++i5) {
                            const double qm = qm4 + a_mu[5] * g[i5];
                            const double qn = qn4 + a_nu[5] * g[i5];
                            if (std::abs(qm - target_mu) > slack_mu || std::abs(qn - target_nu) > slack_nu) continue;
                            ++r.feasible_points;
                            r.best = std::min(r.best, obj);
                            r.min_excess = std::min(r.min_excess, obj - reference);
                        }
                    }
                }
    return r;
}

}  // namespace oracle
