// SPDX-License-Identifier: Apache-2.0
//
// Plain-text and CSV renderings of analysis results. All numbers go through
// fixed printf formats so output is byte-stable across runs.
#pragma once

#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "decoyattack/analysis.hpp"
#include "decoyattack/mc_sim.hpp"

namespace decoyattack {

inline std::string format_number(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline constexpr const char* sweep_csv_header = "loss_db,eta,q_mu_gain,r_lower,r_upper,feasible,attack_success";

/// One CSV line per row; r_upper is left empty where the attack is infeasible.
inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << sweep_csv_header << '\n';
    for (const auto& r : rows) {
        out << format_number(r.loss_db, "%.6f") << ',' << format_number(r.eta) << ','
            << format_number(r.q_mu_gain) << ',' << format_number(r.r_lower) << ','
            << (r.r_upper ? format_number(*r.r_upper) : std::string{}) << ',' << (r.feasible ? 1 : 0) << ','
            << (r.attack_success ? 1 : 0) << '\n';
    }
}

inline void write_key_value(std::ostream& out, const std::string& key, double v, const char* fmt = "%.10g") {
    out << key << '=' << format_number(v, fmt) << '\n';
}

inline void write_estimate(std::ostream& out, const std::string& key, const Estimate& e) {
    write_key_value(out, key, e.value);
    write_key_value(out, key + "_se", e.std_error);
}

}  // namespace decoyattack
