// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo realization of the USD + PNS attack, used to cross-check the analytic
// gain and error expressions, and ingestion of measured USD stability series.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "decoyattack/attack_opt.hpp"
#include "decoyattack/coherent_source.hpp"

namespace decoyattack {

/// Counter-based generator: every (pulse index, draw slot) pair maps to an independent
/// uniform variate, so any partition of the pulse range reproduces the serial stream.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t bits(std::uint64_t index, std::uint32_t slot) const {
        return mix(mix(key_ + index) ^ (static_cast<std::uint64_t>(slot) * 0xd1b54a32d192ed03ULL));
    }

    /// Uniform in [0, 1).
    double uniform(std::uint64_t index, std::uint32_t slot) const {
        return static_cast<double>(bits(index, slot) >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t key_;
};

enum class StateKind : std::uint8_t { signal = 0, decoy = 1 };
enum class UsdOutcome : std::uint8_t { e_mu = 0, e_nu = 1, e_f = 2 };

struct PulseRecord {
    StateKind state_kind = StateKind::signal;
    unsigned phase_index = 0;  ///< BB84 phase = phase_index * pi/2
    unsigned photon_count = 0;
    UsdOutcome usd_outcome = UsdOutcome::e_f;
    bool forwarded = false;
    bool bit_error = false;

    double bb84_phase() const { return phase_index * std::numbers::pi / 2.0; }
};

struct TrialConfig {
    std::uint64_t n_pulses = 1'000'000;
    std::uint64_t seed = 0;
    SourceConfig cfg{0.5, 0.1};
    UsdPerformance usd;
    YieldPlan plan;

    void validate() const {
        if (n_pulses < 1) throw std::invalid_argument("TrialConfig: n_pulses must be >= 1");
        usd.validate();
        plan.validate();
    }
};

namespace detail {

/// Inverse-CDF table for Poisson sampling.
class PoissonSampler {
  public:
    explicit PoissonSampler(double mean) {
        double acc = 0.0;
        for (unsigned i = 0; i < 400; ++i) {
            acc += poisson_pmf(mean, i);
            cdf_.push_back(acc);
            if (i > mean && 1.0 - acc < 1e-17) break;
        }
        cdf_.back() = 1.0;
    }
    unsigned operator()(double u) const {
        return static_cast<unsigned>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    }

  private:
    std::vector<double> cdf_;
};

}  // namespace detail

/// Aggregated integer tallies; merging is exact and order-independent.
struct TrialCounts {
    std::array<std::uint64_t, 2> sent{};        ///< by StateKind
    std::array<std::uint64_t, 2> conclusive{};  ///< outcome E_mu or E_nu
    std::array<std::uint64_t, 2> correct{};     ///< conclusive and naming the sent state
    std::array<std::uint64_t, 2> detected{};    ///< forwarded to Bob
    std::array<std::uint64_t, 2> errors{};      ///< forwarded and producing a bit error
    std::array<std::array<std::uint64_t, 3>, 4> phase_by_outcome{};
    std::uint64_t forwarded_inconclusive = 0;

    TrialCounts& operator+=(const TrialCounts& o) {
        for (std::size_t k = 0; k < 2; ++k) {
            sent[k] += o.sent[k];
            conclusive[k] += o.conclusive[k];
            correct[k] += o.correct[k];
            detected[k] += o.detected[k];
            errors[k] += o.errors[k];
        }
        for (std::size_t p = 0; p < 4; ++p)
            for (std::size_t c = 0; c < 3; ++c) phase_by_outcome[p][c] += o.phase_by_outcome[p][c];
        forwarded_inconclusive += o.forwarded_inconclusive;
        return *this;
    }
    friend bool operator==(const TrialCounts&, const TrialCounts&) = default;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    friend bool operator==(const Estimate&, const Estimate&) = default;
};

/// Binomial proportion k/n with standard error sqrt(p(1-p)/n); zero when n = 0.
inline Estimate binomial_estimate(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return {};
    const double p = static_cast<double>(k) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

struct EmpiricalStats {
    Estimate q_mu_hat, q_nu_hat;
    Estimate xi_mu_hat, xi_nu_hat;
    Estimate gain_mu_hat, gain_nu_hat;
    Estimate error_gain_mu_hat, error_gain_nu_hat;  ///< E*Q per pulse
    TrialCounts counts;

    friend bool operator==(const EmpiricalStats&, const EmpiricalStats&) = default;
};

class AttackSimulator {
  public:
    explicit AttackSimulator(TrialConfig tc)
        : tc_(std::move(tc)), rng_(tc_.seed), signal_photons_(tc_.cfg.mu()), decoy_photons_(tc_.cfg.nu()) {
        tc_.validate();
    }

    const TrialConfig& config() const noexcept { return tc_; }

    PulseRecord pulse(std::uint64_t index) const {
        PulseRecord rec;
        rec.state_kind = rng_.uniform(index, 0) < 0.5 ? StateKind::signal : StateKind::decoy;
        rec.phase_index = static_cast<unsigned>(rng_.uniform(index, 1) * 4.0);
        const bool is_signal = rec.state_kind == StateKind::signal;

        const double q = is_signal ? tc_.usd.q_mu : tc_.usd.q_nu;
        const double xi = is_signal ? tc_.usd.xi_mu : tc_.usd.xi_nu;
        const double u = rng_.uniform(index, 2);
        const UsdOutcome right = is_signal ? UsdOutcome::e_mu : UsdOutcome::e_nu;
        const UsdOutcome wrong = is_signal ? UsdOutcome::e_nu : UsdOutcome::e_mu;
        rec.usd_outcome = u < q * xi ? right : (u < q ? wrong : UsdOutcome::e_f);

        rec.photon_count = is_signal ? signal_photons_(rng_.uniform(index, 3)) : decoy_photons_(rng_.uniform(index, 3));

        if (rec.usd_outcome != UsdOutcome::e_f) {
            const double z = rec.usd_outcome == UsdOutcome::e_mu ? tc_.plan.mu_yield(rec.photon_count)
                                                                 : tc_.plan.nu_yield(rec.photon_count);
            rec.forwarded = rng_.uniform(index, 4) < z;
            rec.bit_error = rec.forwarded && rec.usd_outcome == wrong && rng_.uniform(index, 5) < 0.5;
        }
        return rec;
    }

    TrialCounts count_range(std::uint64_t begin, std::uint64_t end) const {
        TrialCounts c;
        for (std::uint64_t i = begin; i < end; ++i) {
            const PulseRecord r = pulse(i);
            const auto k = static_cast<std::size_t>(r.state_kind);
            ++c.sent[k];
            if (r.usd_outcome != UsdOutcome::e_f) {
                ++c.conclusive[k];
                if (static_cast<std::size_t>(r.usd_outcome) == k) ++c.correct[k];
            }
            if (r.forwarded) {
                ++c.detected[k];
                if (r.usd_outcome == UsdOutcome::e_f) ++c.forwarded_inconclusive;
            }
            if (r.bit_error) ++c.errors[k];
            ++c.phase_by_outcome[r.phase_index][static_cast<std::size_t>(r.usd_outcome)];
        }
        return c;
    }

    /// Runs all pulses in fixed-size blocks spread over `threads` workers (0: hardware).
    EmpiricalStats run(unsigned threads = 0) const {
        constexpr std::uint64_t block = 1u << 16;
        const std::uint64_t n_blocks = (tc_.n_pulses + block - 1) / block;
        unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
        workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_blocks));

        std::vector<TrialCounts> partial(workers);
        auto work = [&](unsigned w) {
            for (std::uint64_t b = w; b < n_blocks; b += workers)
                partial[w] += count_range(b * block, std::min(tc_.n_pulses, (b + 1) * block));
        };
        if (workers <= 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& t : pool) t.join();
        }
        TrialCounts total;
        for (const auto& p : partial) total += p;
        return summarize(total);
    }

    static EmpiricalStats summarize(const TrialCounts& c) {
        EmpiricalStats s;
        s.counts = c;
        s.q_mu_hat = binomial_estimate(c.conclusive[0], c.sent[0]);
        s.q_nu_hat = binomial_estimate(c.conclusive[1], c.sent[1]);
        s.xi_mu_hat = binomial_estimate(c.correct[0], c.conclusive[0]);
        s.xi_nu_hat = binomial_estimate(c.correct[1], c.conclusive[1]);
        s.gain_mu_hat = binomial_estimate(c.detected[0], c.sent[0]);
        s.gain_nu_hat = binomial_estimate(c.detected[1], c.sent[1]);
        s.error_gain_mu_hat = binomial_estimate(c.errors[0], c.sent[0]);
        s.error_gain_nu_hat = binomial_estimate(c.errors[1], c.sent[1]);
        return s;
    }

  private:
    TrialConfig tc_;
    CounterRng rng_;
    detail::PoissonSampler signal_photons_;
    detail::PoissonSampler decoy_photons_;
};

inline EmpiricalStats run_trials(const TrialConfig& tc, unsigned threads = 0) {
    return AttackSimulator(tc).run(threads);
}

// ---------------------------------------------------------------------------
// Stability series

struct StabilitySample {
    double t = 0.0;
    double q_mu = 0.0;
    double q_nu = 0.0;
    double xi_mu = 0.0;
    double xi_nu = 0.0;
};

class StabilityDataError : public std::runtime_error {
  public:
    StabilityDataError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

struct ColumnSummary {
    std::string name;
    double mean = 0.0;
    double stddev = 0.0;  ///< sample (n - 1) standard deviation
    bool flagged = false;
};

struct StabilitySummary {
    std::size_t rows = 0;
    std::array<ColumnSummary, 4> columns;  ///< q_mu, q_nu, xi_mu, xi_nu
};

inline constexpr std::array<const char*, 4> stability_columns{"q_mu", "q_nu", "xi_mu", "xi_nu"};

/// Per-column mean and sample standard deviation; a column is flagged when its deviation
/// exceeds the matching threshold. Rows are numbered from 1.
inline StabilitySummary ingest_stability_series(
    std::span<const StabilitySample> rows,
    const std::array<double, 4>& std_thresholds = {std::numeric_limits<double>::infinity(),
                                                   std::numeric_limits<double>::infinity(),
                                                   std::numeric_limits<double>::infinity(),
                                                   std::numeric_limits<double>::infinity()}) {
    if (rows.size() < 2) throw StabilityDataError(rows.size(), "need at least two rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& s = rows[r];
        if (!std::isfinite(s.t)) throw StabilityDataError(r + 1, "non-finite time");
        for (double v : {s.q_mu, s.q_nu, s.xi_mu, s.xi_nu})
            if (!(v >= 0.0 && v <= 1.0)) throw StabilityDataError(r + 1, "probability outside [0, 1]");
    }

    StabilitySummary out;
    out.rows = rows.size();
    for (std::size_t c = 0; c < 4; ++c) {
        // Welford
        double mean = 0.0, m2 = 0.0;
        std::size_t n = 0;
        for (const auto& s : rows) {
            const double v = std::array{s.q_mu, s.q_nu, s.xi_mu, s.xi_nu}[c];
            ++n;
            const double delta = v - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (v - mean);
        }
        auto& col = out.columns[c];
        col.name = stability_columns[c];
        col.mean = mean;
        col.stddev = std::sqrt(m2 / static_cast<double>(n - 1));
        col.flagged = col.stddev > std_thresholds[c];
    }
    return out;
}

/// Reads `t,q_mu,q_nu,xi_mu,xi_nu` CSV. Data rows are numbered from 1 in errors.
inline std::vector<StabilitySample> parse_stability_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw StabilityDataError(0, "empty input, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,q_mu,q_nu,xi_mu,xi_nu")
        throw StabilityDataError(0, "header must be 't,q_mu,q_nu,xi_mu,xi_nu'");

    std::vector<StabilitySample> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::array<double, 5> v{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= 5) throw StabilityDataError(row, "too many fields");
            try {
                std::size_t used = 0;
                v[k] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw StabilityDataError(row, "field " + std::to_string(k + 1) + " is not a number: '" + cell + "'");
            }
            ++k;
        }
        if (k != 5) throw StabilityDataError(row, "expected 5 fields, got " + std::to_string(k));
        out.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    return out;
}

}  // namespace decoyattack
