// SPDX-License-Identifier: Apache-2.0
//
// Coherent-state mathematics for a non-phase-randomized signal/decoy source:
// overlaps, unambiguous-state-discrimination (USD) success probabilities, the
// optimal USD POVM on a truncated Fock space, and Poisson photon statistics.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace decoyattack {

using Complex = std::complex<double>;

/// Reduce an angle to [0, 2pi).
inline double reduce_phase(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Signal/decoy intensities (mean photon numbers) and their optical phases.
///
/// Requires mu > nu >= 0. Phases are stored reduced modulo 2pi.
class SourceConfig {
  public:
    SourceConfig(double mu, double nu, double theta_s = 0.0, double theta_d = 0.0)
        : mu_(mu), nu_(nu), theta_s_(reduce_phase(theta_s)), theta_d_(reduce_phase(theta_d)) {
        if (!std::isfinite(mu) || !std::isfinite(nu) || !(nu >= 0.0) || !(mu > nu))
            throw std::invalid_argument("SourceConfig: require mu > nu >= 0 (got mu=" +
                                        std::to_string(mu) + ", nu=" + std::to_string(nu) + ")");
        if (!std::isfinite(theta_s) || !std::isfinite(theta_d))
            throw std::invalid_argument("SourceConfig: phases must be finite");
    }

    double mu() const noexcept { return mu_; }
    double nu() const noexcept { return nu_; }
    double theta_s() const noexcept { return theta_s_; }
    double theta_d() const noexcept { return theta_d_; }
    double relative_phase() const noexcept { return reduce_phase(theta_s_ - theta_d_); }

    /// Amplitude of the first (reference-free) half of the signal pulse, sqrt(mu/2) e^{i theta_s}.
    Complex signal_half_amplitude() const { return std::polar(std::sqrt(mu_ / 2.0), theta_s_); }
    Complex decoy_half_amplitude() const { return std::polar(std::sqrt(nu_ / 2.0), theta_d_); }

    friend bool operator==(const SourceConfig&, const SourceConfig&) = default;

  private:
    double mu_;
    double nu_;
    double theta_s_;
    double theta_d_;
};

/// |<sqrt(nu/2) e^{i theta_d} | sqrt(mu/2) e^{i theta_s}>|, the optimal USD failure probability
/// for two equiprobable pure states.
inline double failure_probability(const SourceConfig& cfg) {
    const double dist2 = 0.5 * (cfg.mu() + cfg.nu()) -
                         std::sqrt(cfg.mu() * cfg.nu()) * std::cos(cfg.theta_s() - cfg.theta_d());
    return std::exp(-0.5 * std::max(dist2, 0.0));
}

/// q_opt = 1 - p_f.
inline double usd_success_optimal(const SourceConfig& cfg) {
    const double dist2 = 0.5 * (cfg.mu() + cfg.nu()) -
                         std::sqrt(cfg.mu() * cfg.nu()) * std::cos(cfg.theta_s() - cfg.theta_d());
    // -expm1 keeps precision when the states nearly coincide.
    return -std::expm1(-0.5 * std::max(dist2, 0.0));
}

/// Success ceiling of the interferometric (linear optics) USD with ideal detectors:
/// half the vacuum-projection complement of the amplitude difference sqrt(mu/4) - sqrt(nu/4).
inline double usd_success_linear_optics(const SourceConfig& cfg) {
    const double dist2 = 0.25 * (cfg.mu() + cfg.nu()) -
                         0.5 * std::sqrt(cfg.mu() * cfg.nu()) * std::cos(cfg.theta_s() - cfg.theta_d());
    return -0.5 * std::expm1(-std::max(dist2, 0.0));
}

/// Poisson probability mean^i e^{-mean} / i!. Evaluated in log space.
inline double poisson_pmf(double mean, unsigned i) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson_pmf: mean must be >= 0");
    if (mean == 0.0) return i == 0 ? 1.0 : 0.0;
    if (i == 0) return std::exp(-mean);
    const double n = static_cast<double>(i);
    return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

/// Probability mass strictly beyond `cutoff`, summed directly from the tail so that
/// values far below machine epsilon are still resolved.
inline double poisson_tail(double mean, unsigned cutoff) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson_tail: mean must be >= 0");
    if (mean == 0.0) return 0.0;
    double tail = 0.0;
    for (unsigned i = cutoff + 1;; ++i) {
        const double term = poisson_pmf(mean, i);
        tail += term;
        if (i > mean && term <= tail * 1e-17) break;
        if (term == 0.0 && i > mean) break;
    }
    return tail;
}

/// Smallest cutoff N with Poisson(mean) mass beyond N below `tail_tolerance`.
inline unsigned minimum_cutoff(double mean, double tail_tolerance = 1e-10) {
    unsigned n = 1;
    while (poisson_tail(mean, n) >= tail_tolerance) ++n;
    return n;
}

/// Coherent state |alpha> truncated to Fock states 0..cutoff.
struct CoherentVector {
    Complex amplitude;
    unsigned cutoff = 0;
    Eigen::VectorXcd coeffs;

    double squared_norm() const { return coeffs.squaredNorm(); }
};

inline CoherentVector coherent_vector(Complex alpha, unsigned cutoff) {
    if (cutoff < 1) throw std::invalid_argument("coherent_vector: cutoff must be >= 1");
    CoherentVector v{alpha, cutoff, Eigen::VectorXcd(cutoff + 1)};
    // c_n = c_{n-1} * alpha / sqrt(n), starting from e^{-|alpha|^2/2}.
    v.coeffs[0] = std::exp(-0.5 * std::norm(alpha));
    for (unsigned n = 1; n <= cutoff; ++n)
        v.coeffs[n] = v.coeffs[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

/// Dense operator on the truncated Fock space {|0>, ..., |cutoff>}.
class FockOperator {
  public:
    FockOperator() = default;
    explicit FockOperator(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 2)
            throw std::invalid_argument("FockOperator: matrix must be square with dimension >= 2");
    }

    static FockOperator identity(unsigned cutoff) {
        return FockOperator(Eigen::MatrixXcd::Identity(cutoff + 1, cutoff + 1));
    }
    /// |phi><phi|
    static FockOperator projector(const Eigen::VectorXcd& phi) {
        return FockOperator(phi * phi.adjoint());
    }

    unsigned cutoff() const { return static_cast<unsigned>(entries_.rows() - 1); }
    const Eigen::MatrixXcd& entries() const noexcept { return entries_; }

    /// max |A - A^dagger|
    double hermiticity_residual() const {
        return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    }
    bool is_hermitian(double tol = 1e-10) const { return hermiticity_residual() <= tol; }

    /// Smallest eigenvalue of the Hermitian part.
    double min_eigenvalue() const {
        const Eigen::MatrixXcd h = 0.5 * (entries_ + entries_.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }
    bool is_positive_semidefinite(double tol = 1e-8) const { return min_eigenvalue() >= -tol; }

    /// <v|A|v>, real part (imaginary part vanishes for Hermitian A).
    double expectation(const CoherentVector& v) const {
        check_dimension(v);
        return (v.coeffs.adjoint() * entries_ * v.coeffs)(0, 0).real();
    }

    FockOperator operator+(const FockOperator& o) const { return FockOperator(entries_ + o.entries_); }
    FockOperator operator-(const FockOperator& o) const { return FockOperator(entries_ - o.entries_); }
    FockOperator operator*(double s) const { return FockOperator(entries_ * s); }

  private:
    void check_dimension(const CoherentVector& v) const {
        if (v.coeffs.size() != entries_.rows())
            throw std::invalid_argument("FockOperator: vector/operator cutoff mismatch");
    }
    Eigen::MatrixXcd entries_;
};

/// Optimal USD measurement {E_mu, E_nu, E_f} between the signal and decoy half-pulses.
struct UsdPovm {
    FockOperator e_mu;
    FockOperator e_nu;
    FockOperator e_f;
};

/// Cutoff needed so both half-pulse coherent vectors lose less than `tail_tolerance`.
inline unsigned required_povm_cutoff(const SourceConfig& cfg, double tail_tolerance = 1e-10) {
    return minimum_cutoff(cfg.mu() / 2.0, tail_tolerance);
}

inline constexpr unsigned default_fock_cutoff = 40;

inline UsdPovm build_usd_povm(const SourceConfig& cfg, unsigned cutoff = default_fock_cutoff) {
    const unsigned needed = required_povm_cutoff(cfg);
    if (cutoff < needed)
        throw std::invalid_argument("build_usd_povm: cutoff " + std::to_string(cutoff) +
                                    " too small, need at least " + std::to_string(needed));

    const CoherentVector sig = coherent_vector(cfg.signal_half_amplitude(), cutoff);
    const CoherentVector dec = coherent_vector(cfg.decoy_half_amplitude(), cutoff);
    const double pf = failure_probability(cfg);
    const double norm = 1.0 / ((1.0 + pf) * (1.0 - pf * pf));

    // <dec|sig>; the complement vectors below are orthogonal to the other state.
    const Complex overlap = dec.coeffs.dot(sig.coeffs);
    const Eigen::VectorXcd sig_perp = sig.coeffs - overlap * dec.coeffs;
    const Eigen::VectorXcd dec_perp = dec.coeffs - std::conj(overlap) * sig.coeffs;

    UsdPovm povm;
    povm.e_mu = FockOperator::projector(sig_perp) * norm;
    povm.e_nu = FockOperator::projector(dec_perp) * norm;
    povm.e_f = FockOperator::identity(cutoff) - povm.e_mu - povm.e_nu;
    return povm;
}

}  // namespace decoyattack
