// SPDX-License-Identifier: Apache-2.0
//
// Loss sweeps of the believed and attack-imposed key rates, crossover search and
// extraction of the loss interval in which the attack steals key.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "decoyattack/attack_opt.hpp"
#include "decoyattack/channel_decoy.hpp"
#include "decoyattack/coherent_source.hpp"

namespace decoyattack {

class AnalysisError : public std::runtime_error {
  public:
    enum class Kind { no_bracket, infeasible_endpoint, empty_region, bad_range };

    AnalysisError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

struct AnalysisOptions {
    unsigned n_trunc = default_photon_truncation;
    bool enforce_errors = false;
    unsigned threads = 0;  ///< 0: hardware concurrency
    double resolution_db = 0.01;
};

/// One loss point. attack_success means feasible, r_lower > r_upper and r_lower > 0.
struct SweepRow {
    double loss_db = 0.0;
    double eta = 0.0;
    double q_mu_gain = 0.0;
    double r_lower = 0.0;
    std::optional<double> r_upper;
    bool feasible = false;
    bool attack_success = false;
};

struct SweepRange {
    double start_db = 0.0;
    double end_db = 0.0;
    double step_db = 0.1;

    void validate() const {
        if (!std::isfinite(start_db) || !std::isfinite(end_db) || !(start_db < end_db))
            throw AnalysisError(AnalysisError::Kind::bad_range, "sweep range: start must be below end");
        if (!(step_db > 0.0)) throw AnalysisError(AnalysisError::Kind::bad_range, "sweep range: step must be > 0");
    }

    /// Grid values start + i*step, rounded to 1e-9 dB so that nested grids share exact values.
    std::vector<double> grid() const {
        validate();
        const auto count = static_cast<std::size_t>(std::floor((end_db - start_db) / step_db + 1e-9)) + 1;
        std::vector<double> g(count);
        for (std::size_t i = 0; i < count; ++i)
            g[i] = std::round((start_db + static_cast<double>(i) * step_db) * 1e9) / 1e9;
        return g;
    }
};

inline SweepRow evaluate_point(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch_base,
                               double loss_db, const AnalysisOptions& opt = {}) {
    const ChannelParams ch = ch_base.at_loss_db(loss_db);
    SweepRow row;
    row.loss_db = loss_db;
    row.eta = ch.eta;
    const GainStats g = normal_gains(cfg, ch);
    row.q_mu_gain = g.q_mu_gain;
    row.r_lower = key_rate_lower(cfg, g, decoy_estimates(cfg, g));
    const AttackSolution sol = optimize_yields(cfg, usd, ch, opt.n_trunc, opt.enforce_errors);
    row.feasible = sol.feasible;
    if (sol.feasible) row.r_upper = sol.rate_upper;
    row.attack_success = sol.feasible && row.r_lower > sol.rate_upper && row.r_lower > 0.0;
    return row;
}

inline std::vector<SweepRow> sweep(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch_base,
                                   const SweepRange& range, const AnalysisOptions& opt = {}) {
    const std::vector<double> grid = range.grid();
    std::vector<SweepRow> rows(grid.size());
    unsigned workers = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));

    auto work = [&](std::size_t begin) {
        for (std::size_t i = begin; i < grid.size(); i += workers)
            rows[i] = evaluate_point(cfg, usd, ch_base, grid[i], opt);
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace detail {

/// Given pred(a) != pred(b), halves [a, b] until narrower than `resolution`; returns the midpoint.
inline double bisect_predicate(const std::function<bool(double)>& pred, double a, double b, double resolution) {
    const bool pa = pred(a);
    while (std::abs(b - a) > resolution) {
        const double mid = 0.5 * (a + b);
        if (pred(mid) == pa)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Loss where R^l - R^u changes sign inside [lo, hi]. The bracket is scanned from the low
/// end and the first sign change is refined by bisection, so a non-monotone difference
/// still yields the lowest crossing.
inline double find_crossover(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch_base,
                             double bracket_lo_db, double bracket_hi_db, const AnalysisOptions& opt = {}) {
    if (!(bracket_lo_db < bracket_hi_db))
        throw AnalysisError(AnalysisError::Kind::bad_range, "find_crossover: bracket must satisfy lo < hi");
    auto diff = [&](double loss) -> std::optional<double> {
        const SweepRow r = evaluate_point(cfg, usd, ch_base, loss, opt);
        if (!r.feasible) return std::nullopt;
        return r.r_lower - *r.r_upper;
    };
    const auto d_lo = diff(bracket_lo_db);
    const auto d_hi = diff(bracket_hi_db);
    if (!d_lo || !d_hi)
        throw AnalysisError(AnalysisError::Kind::infeasible_endpoint,
                            std::string("find_crossover: attack infeasible at ") +
                                (!d_lo ? "lower" : "upper") + " bracket endpoint");
    if ((*d_lo > 0.0) == (*d_hi > 0.0))
        throw AnalysisError(AnalysisError::Kind::no_bracket, "find_crossover: R^l - R^u has the same sign at both ends");

    const bool lo_positive = *d_lo > 0.0;
    auto positive = [&](double loss) {
        const auto d = diff(loss);
        return d ? *d > 0.0 : lo_positive;
    };

    // Coarse scan for the first sign change, then bisection.
    const double span = bracket_hi_db - bracket_lo_db;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / 0.5)));
    double a = bracket_lo_db;
    double b = bracket_hi_db;
    for (int k = 1; k <= steps; ++k) {
        const double x = k == steps ? bracket_hi_db : bracket_lo_db + span * k / steps;
        if (positive(x) != lo_positive) {
            b = x;
            break;
        }
        a = x;
    }
    return detail::bisect_predicate(positive, a, b, opt.resolution_db);
}

/// First sign change of R^l - R^u between adjacent feasible grid points of `range`, refined
/// with find_crossover.
inline double locate_crossover(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch_base,
                               const SweepRange& range, const AnalysisOptions& opt = {}) {
    const auto rows = sweep(cfg, usd, ch_base, range, opt);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& p = rows[i - 1];
        const auto& q = rows[i];
        if (!p.feasible || !q.feasible) continue;
        if ((p.r_lower - *p.r_upper > 0.0) != (q.r_lower - *q.r_upper > 0.0))
            return find_crossover(cfg, usd, ch_base, p.loss_db, q.loss_db, opt);
    }
    throw AnalysisError(AnalysisError::Kind::no_bracket, "locate_crossover: no sign change of R^l - R^u in range");
}

/// What terminates the success interval at its upper end.
enum class RegionClose {
    unbounded,           ///< still successful at the end of the sweep
    bound_recrossing,    ///< R^u rises above R^l again
    believed_rate_abort, ///< R^l <= 0, Alice and Bob abort
    attack_infeasible,   ///< Eve can no longer reproduce the statistics
};

struct SuccessRegion {
    double lower_db = 0.0;
    std::optional<double> upper_db;
    RegionClose closed_by = RegionClose::unbounded;
    /// First loss above the lower end at which R^l <= 0, when inside the sweep.
    std::optional<double> abort_db;
};

inline const char* to_string(RegionClose c) {
    switch (c) {
        case RegionClose::unbounded: return "unbounded";
        case RegionClose::bound_recrossing: return "bound_recrossing";
        case RegionClose::believed_rate_abort: return "believed_rate_abort";
        case RegionClose::attack_infeasible: return "attack_infeasible";
    }
    return "unknown";
}

inline SuccessRegion success_region(const SourceConfig& cfg, const UsdPerformance& usd, const ChannelParams& ch_base,
                                    const SweepRange& range, const AnalysisOptions& opt = {}) {
    const auto rows = sweep(cfg, usd, ch_base, range, opt);
    const auto first = std::find_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.attack_success; });
    if (first == rows.end())
        throw AnalysisError(AnalysisError::Kind::empty_region, "success_region: attack never succeeds in range");

    auto success = [&](double loss) { return evaluate_point(cfg, usd, ch_base, loss, opt).attack_success; };
    SuccessRegion region;
    region.lower_db = first == rows.begin()
                          ? first->loss_db
                          : detail::bisect_predicate(success, std::prev(first)->loss_db, first->loss_db,
                                                     opt.resolution_db);

    const auto after = std::find_if(first, rows.end(), [](const SweepRow& r) { return !r.attack_success; });
    if (after != rows.end()) {
        region.upper_db =
            detail::bisect_predicate(success, std::prev(after)->loss_db, after->loss_db, opt.resolution_db);
        const SweepRow closing = evaluate_point(cfg, usd, ch_base, *region.upper_db + opt.resolution_db, opt);
        if (!closing.feasible)
            region.closed_by = RegionClose::attack_infeasible;
        else if (closing.r_lower <= 0.0)
            region.closed_by = RegionClose::believed_rate_abort;
        else
            region.closed_by = RegionClose::bound_recrossing;
    }

    const auto abort = std::find_if(first, rows.end(), [](const SweepRow& r) { return r.r_lower <= 0.0; });
    if (abort != rows.end()) {
        auto positive = [&](double loss) { return believed_key_rate(cfg, ch_base.at_loss_db(loss)) > 0.0; };
        region.abort_db = detail::bisect_predicate(positive, std::prev(abort)->loss_db, abort->loss_db,
                                                   opt.resolution_db);
    }
    return region;
}

}  // namespace decoyattack
