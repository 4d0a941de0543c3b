// SPDX-License-Identifier: Apache-2.0
//
// Normal-channel statistics and the one-decoy post-processing that Alice and Bob
// apply when they (wrongly) assume a phase-randomized source.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "decoyattack/coherent_source.hpp"

namespace decoyattack {

/// How background counts enter the observed gains.
enum class GainModel {
    /// Q_a = Y_0 + 1 - e^{-eta a}. Background clicks are part of every observed gain.
    with_background,
    /// Q_a = 1 - e^{-eta a}; Y_0 appears only in the error term.
    signal_only,
};

inline double loss_db_to_eta(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }
inline double eta_to_loss_db(double eta) { return -10.0 * std::log10(eta); }

/// Overall loss (dB) of a link with `channel_loss_db` in front of a detector of the given efficiency.
inline double overall_loss_db(double channel_loss_db, double detector_efficiency) {
    if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
        throw std::invalid_argument("overall_loss_db: detector efficiency must be in (0, 1]");
    return channel_loss_db + eta_to_loss_db(detector_efficiency);
}

/// Detector efficiency and dark counts of the superconducting-detector setup assumed for Bob.
inline constexpr double default_detector_efficiency = 0.05;
inline constexpr double default_background_yield = 1e-7;
inline constexpr double default_misalignment = 0.02;

struct ChannelParams {
    double eta = 1.0;                      ///< overall efficiency, detector included
    double y0 = default_background_yield;  ///< background count rate per pulse
    double e_d = default_misalignment;     ///< misalignment error probability
    static constexpr double e0 = 0.5;      ///< error rate of background counts
    GainModel gain_model = GainModel::with_background;

    void validate() const {
        if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("ChannelParams: eta must be in (0, 1]");
        if (!(y0 >= 0.0 && y0 < 1.0)) throw std::invalid_argument("ChannelParams: y0 must be in [0, 1)");
        if (!(e_d >= 0.0 && e_d <= 0.5)) throw std::invalid_argument("ChannelParams: e_d must be in [0, 1/2]");
    }

    static ChannelParams from_loss_db(double loss_db, double y0 = default_background_yield,
                                      double e_d = default_misalignment,
                                      GainModel model = GainModel::with_background) {
        ChannelParams ch{loss_db_to_eta(loss_db), y0, e_d, model};
        ch.validate();
        return ch;
    }

    ChannelParams at_loss_db(double loss_db) const {
        ChannelParams ch = *this;
        ch.eta = loss_db_to_eta(loss_db);
        ch.validate();
        return ch;
    }

    double loss_db() const { return eta_to_loss_db(eta); }
};

/// Per-pulse detection and error-detection probabilities for signal and decoy.
struct GainStats {
    double q_mu_gain = 0.0;
    double q_nu_gain = 0.0;
    double emu_qmu = 0.0;
    double enu_qnu = 0.0;

    /// E_mu, or 0 when nothing is detected.
    double qber_mu() const { return q_mu_gain > 0.0 ? emu_qmu / q_mu_gain : 0.0; }
    double qber_nu() const { return q_nu_gain > 0.0 ? enu_qnu / q_nu_gain : 0.0; }

    void validate() const {
        auto ok = [](double eq, double q) { return eq >= 0.0 && eq <= q && q <= 1.0; };
        if (!ok(emu_qmu, q_mu_gain) || !ok(enu_qnu, q_nu_gain))
            throw std::invalid_argument("GainStats: require 0 <= E*Q <= Q <= 1");
    }
};

inline GainStats normal_gains(const SourceConfig& cfg, const ChannelParams& ch) {
    ch.validate();
    // 1 - e^{-x} via expm1 for tiny eta.
    const double det_mu = -std::expm1(-ch.eta * cfg.mu());
    const double det_nu = -std::expm1(-ch.eta * cfg.nu());
    const double background = ch.gain_model == GainModel::with_background ? ch.y0 : 0.0;
    GainStats g;
    g.q_mu_gain = background + det_mu;
    g.q_nu_gain = background + det_nu;
    g.emu_qmu = ChannelParams::e0 * ch.y0 + ch.e_d * det_mu;
    g.enu_qnu = ChannelParams::e0 * ch.y0 + ch.e_d * det_nu;
    return g;
}

/// H(e) in bits; H(0) = H(1) = 0.
inline double binary_entropy(double e) {
    if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument("binary_entropy: argument must be in [0, 1], got " + std::to_string(e));
    if (e == 0.0 || e == 1.0) return 0.0;
    return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

inline double clamp_probability(double p, double hi = 1.0) {
    if (std::isnan(p)) return hi;
    return std::clamp(p, 0.0, hi);
}

/// Single-photon yield lower bound from one weak decoy, clamped to [0, 1].
inline double one_decoy_y1_lower(const SourceConfig& cfg, const GainStats& g) {
    const double mu = cfg.mu();
    const double nu = cfg.nu();
    if (nu <= 0.0 || nu >= mu)
        throw std::invalid_argument("one_decoy_y1_lower: need mu > nu > 0 for a one-decoy estimate");
    const double mu2 = mu * mu;
    const double nu2 = nu * nu;
    const double bracket = g.q_nu_gain * std::exp(nu) - g.q_mu_gain * std::exp(mu) * nu2 / mu2 -
                           g.emu_qmu * std::exp(mu) * (mu2 - nu2) / (ChannelParams::e0 * mu2);
    return clamp_probability(mu / (mu * nu - nu2) * bracket);
}

struct ErrorBound {
    double raw = 0.0;      ///< formula value, may exceed 1 or be +inf
    double clamped = 0.0;  ///< in [0, 1/2]
    bool defined = true;   ///< false when the yield estimate is zero
};

/// Single-photon error-rate upper bound given the yield lower bound.
inline ErrorBound one_decoy_e1_upper(const SourceConfig& cfg, const GainStats& g, double y1_lower) {
    if (!(y1_lower > 0.0)) return {std::numeric_limits<double>::infinity(), 0.5, false};
    const double raw = g.emu_qmu * std::exp(cfg.mu()) / (y1_lower * cfg.mu());
    return {raw, clamp_probability(raw, 0.5), true};
}

struct DecoyEstimates {
    double y1_lower = 0.0;
    double e1_upper = 0.5;
    double e1_raw = std::numeric_limits<double>::infinity();
};

inline DecoyEstimates decoy_estimates(const SourceConfig& cfg, const GainStats& g) {
    DecoyEstimates d;
    d.y1_lower = one_decoy_y1_lower(cfg, g);
    const ErrorBound e1 = one_decoy_e1_upper(cfg, g, d.y1_lower);
    d.e1_upper = e1.clamped;
    d.e1_raw = e1.raw;
    return d;
}

/// Believed key rate R^l = -Q_mu H(E_mu) + Y_1 mu e^{-mu} [1 - H(e_1)], sift factor 1.
/// Returned raw; may be negative.
inline double key_rate_lower(const SourceConfig& cfg, const GainStats& g, const DecoyEstimates& d) {
    if (g.q_mu_gain <= 0.0) return 0.0;
    const double e_mu = clamp_probability(g.qber_mu(), 0.5);
    const double single = d.y1_lower > 0.0
                              ? d.y1_lower * cfg.mu() * std::exp(-cfg.mu()) *
                                    (1.0 - binary_entropy(clamp_probability(d.e1_upper, 0.5)))
                              : 0.0;
    return -g.q_mu_gain * binary_entropy(e_mu) + single;
}

/// R^l for a normal channel, the full believed-rate pipeline.
inline double believed_key_rate(const SourceConfig& cfg, const ChannelParams& ch) {
    const GainStats g = normal_gains(cfg, ch);
    return key_rate_lower(cfg, g, decoy_estimates(cfg, g));
}

}  // namespace decoyattack
