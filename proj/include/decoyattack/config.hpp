// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: JSON documents plus `key.path=value` overrides, validated
// field by field. Omitted fields take the defaults of the reference setup
// (mu = 0.5, nu = 0.1, Y0 = 1e-7, e_d = 0.02, 5% detectors, measured USD figures).
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "decoyattack/analysis.hpp"
#include "decoyattack/attack_opt.hpp"
#include "decoyattack/channel_decoy.hpp"
#include "decoyattack/coherent_source.hpp"

namespace decoyattack {

class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(format(field, message, line)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

  private:
    static std::string format(const std::string& field, const std::string& message, std::optional<std::size_t> line) {
        std::string s;
        if (line) s += "line " + std::to_string(*line) + ": ";
        if (!field.empty()) s += field + ": ";
        return s + message;
    }
    std::string field_;
    std::optional<std::size_t> line_;
};

inline constexpr double default_loss_db = 38.0;

struct RunConfig {
    struct Source {
        double mu = 0.5;
        double nu = 0.1;
        double theta_s = 0.0;
        double theta_d = 0.0;
    } source;

    struct Channel {
        std::optional<double> loss_db;  ///< overall loss, detector efficiency included
        std::optional<double> eta;      ///< overall efficiency
        double y0 = default_background_yield;
        double e_d = default_misalignment;
        double detector_efficiency = default_detector_efficiency;
        GainModel gain_model = GainModel::with_background;
    } channel;

    struct Usd {
        double q_mu = UsdPerformance{}.q_mu;
        double q_nu = UsdPerformance{}.q_nu;
        double xi_mu = UsdPerformance{}.xi_mu;
        double xi_nu = UsdPerformance{}.xi_nu;
        std::optional<UsdCeiling> ideal;  ///< replaces q by the ceiling and xi by 1
    } usd;

    struct Solver {
        unsigned n_trunc = default_photon_truncation;
        bool enforce_errors = false;
    } solver;

    struct Sweep {
        double start_db = 20.0;
        double end_db = 55.0;
        double step_db = 0.1;
    } sweep;

    struct Mc {
        std::uint64_t n_pulses = 1'000'000;
        std::uint64_t seed = 748;
    } mc;

    SourceConfig source_config() const { return {source.mu, source.nu, source.theta_s, source.theta_d}; }

    double loss_db() const {
        if (channel.eta) return eta_to_loss_db(*channel.eta);
        return channel.loss_db.value_or(default_loss_db);
    }

    ChannelParams channel_params() const {
        ChannelParams ch{loss_db_to_eta(loss_db()), channel.y0, channel.e_d, channel.gain_model};
        if (channel.eta) ch.eta = *channel.eta;
        return ch;
    }

    /// Loss of the link alone, i.e. with the detector's share removed.
    double link_loss_db() const { return loss_db() - eta_to_loss_db(channel.detector_efficiency); }

    UsdPerformance usd_performance() const {
        if (usd.ideal) {
            const SourceConfig cfg = source_config();
            return UsdPerformance::ideal(*usd.ideal == UsdCeiling::optimal ? usd_success_optimal(cfg)
                                                                            : usd_success_linear_optics(cfg));
        }
        return {usd.q_mu, usd.q_nu, usd.xi_mu, usd.xi_nu};
    }

    AnalysisOptions analysis_options() const {
        AnalysisOptions o;
        o.n_trunc = solver.n_trunc;
        o.enforce_errors = solver.enforce_errors;
        return o;
    }

    SweepRange sweep_range() const { return {sweep.start_db, sweep.end_db, sweep.step_db}; }
};

namespace detail {

using nlohmann::json;

class Reader {
  public:
    explicit Reader(const json& root) : root_(root) {}

    const json* section(const char* name) {
        if (!root_.contains(name)) return nullptr;
        const json& s = root_.at(name);
        if (!s.is_object()) throw ConfigError(name, "expected an object");
        return &s;
    }

    static void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> known) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (auto k : known) ok = ok || it.key() == k;
            if (!ok) throw ConfigError(prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown field");
        }
    }

    static std::optional<double> number(const json* obj, const std::string& section, const char* key) {
        if (!obj || !obj->contains(key)) return std::nullopt;
        const json& v = obj->at(key);
        if (!v.is_number()) throw ConfigError(section + "." + key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(section + "." + key, "must be finite");
        return d;
    }

    static std::optional<std::uint64_t> count(const json* obj, const std::string& section, const char* key) {
        if (!obj || !obj->contains(key)) return std::nullopt;
        const json& v = obj->at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer()) throw ConfigError(section + "." + key, "must be non-negative");
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
        }
        throw ConfigError(section + "." + key, "expected a non-negative integer");
    }

    static std::optional<bool> boolean(const json* obj, const std::string& section, const char* key) {
        if (!obj || !obj->contains(key)) return std::nullopt;
        const json& v = obj->at(key);
        if (!v.is_boolean()) throw ConfigError(section + "." + key, "expected true or false");
        return v.get<bool>();
    }

    static std::optional<std::string> text(const json* obj, const std::string& section, const char* key) {
        if (!obj || !obj->contains(key)) return std::nullopt;
        const json& v = obj->at(key);
        if (!v.is_string()) throw ConfigError(section + "." + key, "expected a string");
        return v.get<std::string>();
    }

  private:
    const json& root_;
};

inline std::size_t line_of_byte(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("", "override '" + assignment + "' must look like key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // bare strings such as ideal=optimal
    }

    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(path, "empty path component in override");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        if (!node->is_object()) throw ConfigError(path.substr(0, dot), "cannot override inside a non-object");
        start = dot + 1;
    }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& root) {
    using detail::Reader;
    if (!root.is_object()) throw ConfigError("", "top level must be a JSON object");
    Reader::reject_unknown(root, "", {"source", "channel", "usd", "solver", "sweep", "mc"});
    Reader rd(root);
    RunConfig rc;

    if (const auto* s = rd.section("source")) {
        Reader::reject_unknown(*s, "source", {"mu", "nu", "theta_s", "theta_d"});
        rc.source.mu = Reader::number(s, "source", "mu").value_or(rc.source.mu);
        rc.source.nu = Reader::number(s, "source", "nu").value_or(rc.source.nu);
        rc.source.theta_s = Reader::number(s, "source", "theta_s").value_or(0.0);
        rc.source.theta_d = Reader::number(s, "source", "theta_d").value_or(0.0);
    }
    if (!(rc.source.nu >= 0.0)) throw ConfigError("source.nu", "must be >= 0");
    if (!(rc.source.mu > rc.source.nu)) throw ConfigError("source.mu", "must exceed source.nu");

    if (const auto* c = rd.section("channel")) {
        Reader::reject_unknown(*c, "channel", {"loss_db", "eta", "y0", "e_d", "detector_efficiency", "gain_model"});
        rc.channel.loss_db = Reader::number(c, "channel", "loss_db");
        rc.channel.eta = Reader::number(c, "channel", "eta");
        rc.channel.y0 = Reader::number(c, "channel", "y0").value_or(rc.channel.y0);
        rc.channel.e_d = Reader::number(c, "channel", "e_d").value_or(rc.channel.e_d);
        rc.channel.detector_efficiency =
            Reader::number(c, "channel", "detector_efficiency").value_or(rc.channel.detector_efficiency);
        if (auto m = Reader::text(c, "channel", "gain_model")) {
            if (*m == "with_background")
                rc.channel.gain_model = GainModel::with_background;
            else if (*m == "signal_only")
                rc.channel.gain_model = GainModel::signal_only;
            else
                throw ConfigError("channel.gain_model", "expected 'with_background' or 'signal_only'");
        }
    }
    if (rc.channel.loss_db && rc.channel.eta)
        throw ConfigError("channel", "give exactly one of loss_db and eta");
    if (rc.channel.loss_db && !(*rc.channel.loss_db >= 0.0)) throw ConfigError("channel.loss_db", "must be >= 0");
    if (rc.channel.eta && !(*rc.channel.eta > 0.0 && *rc.channel.eta <= 1.0))
        throw ConfigError("channel.eta", "must be in (0, 1]");
    if (!(rc.channel.y0 >= 0.0 && rc.channel.y0 < 1.0)) throw ConfigError("channel.y0", "must be in [0, 1)");
    if (!(rc.channel.e_d >= 0.0 && rc.channel.e_d <= 0.5)) throw ConfigError("channel.e_d", "must be in [0, 0.5]");
    if (!(rc.channel.detector_efficiency > 0.0 && rc.channel.detector_efficiency <= 1.0))
        throw ConfigError("channel.detector_efficiency", "must be in (0, 1]");

    if (const auto* u = rd.section("usd")) {
        Reader::reject_unknown(*u, "usd", {"q_mu", "q_nu", "xi_mu", "xi_nu", "ideal"});
        auto q_mu = Reader::number(u, "usd", "q_mu");
        auto q_nu = Reader::number(u, "usd", "q_nu");
        auto xi_mu = Reader::number(u, "usd", "xi_mu");
        auto xi_nu = Reader::number(u, "usd", "xi_nu");
        if (auto ideal = Reader::text(u, "usd", "ideal")) {
            if (q_mu || q_nu || xi_mu || xi_nu)
                throw ConfigError("usd.ideal", "cannot be combined with explicit q/xi values");
            if (*ideal == "optimal")
                rc.usd.ideal = UsdCeiling::optimal;
            else if (*ideal == "linear_optics")
                rc.usd.ideal = UsdCeiling::linear_optics;
            else
                throw ConfigError("usd.ideal", "expected 'optimal' or 'linear_optics'");
        }
        rc.usd.q_mu = q_mu.value_or(rc.usd.q_mu);
        rc.usd.q_nu = q_nu.value_or(rc.usd.q_nu);
        rc.usd.xi_mu = xi_mu.value_or(rc.usd.xi_mu);
        rc.usd.xi_nu = xi_nu.value_or(rc.usd.xi_nu);
        const std::pair<const char*, double> probs[] = {
            {"usd.q_mu", rc.usd.q_mu}, {"usd.q_nu", rc.usd.q_nu}, {"usd.xi_mu", rc.usd.xi_mu}, {"usd.xi_nu", rc.usd.xi_nu}};
        for (const auto& [name, p] : probs)
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(name, "must be in [0, 1]");
    }

    if (const auto* s = rd.section("solver")) {
        Reader::reject_unknown(*s, "solver", {"n_trunc", "enforce_errors"});
        if (auto n = Reader::count(s, "solver", "n_trunc")) {
            if (*n < 1 || *n > 170) throw ConfigError("solver.n_trunc", "must be in [1, 170]");
            rc.solver.n_trunc = static_cast<unsigned>(*n);
        }
        rc.solver.enforce_errors = Reader::boolean(s, "solver", "enforce_errors").value_or(false);
    }

    if (const auto* s = rd.section("sweep")) {
        Reader::reject_unknown(*s, "sweep", {"start_db", "end_db", "step_db"});
        rc.sweep.start_db = Reader::number(s, "sweep", "start_db").value_or(rc.sweep.start_db);
        rc.sweep.end_db = Reader::number(s, "sweep", "end_db").value_or(rc.sweep.end_db);
        rc.sweep.step_db = Reader::number(s, "sweep", "step_db").value_or(rc.sweep.step_db);
    }
    if (!(rc.sweep.start_db >= 0.0)) throw ConfigError("sweep.start_db", "must be >= 0");
    if (!(rc.sweep.end_db > rc.sweep.start_db)) throw ConfigError("sweep.end_db", "must exceed sweep.start_db");
    if (!(rc.sweep.step_db > 0.0)) throw ConfigError("sweep.step_db", "must be > 0");

    if (const auto* m = rd.section("mc")) {
        Reader::reject_unknown(*m, "mc", {"n_pulses", "seed"});
        if (auto n = Reader::count(m, "mc", "n_pulses")) {
            if (*n < 1) throw ConfigError("mc.n_pulses", "must be >= 1");
            rc.mc.n_pulses = *n;
        }
        rc.mc.seed = Reader::count(m, "mc", "seed").value_or(rc.mc.seed);
    }
    return rc;
}

/// Parses a JSON document (empty text means all defaults) and applies `key.path=value` overrides.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    nlohmann::json root = nlohmann::json::object();
    bool blank = true;
    for (char ch : text) blank = blank && std::isspace(static_cast<unsigned char>(ch));
    if (!blank) {
        try {
            root = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("", std::string("malformed JSON: ") + e.what(), detail::line_of_byte(text, e.byte));
        }
    }
    for (const auto& o : overrides) detail::apply_override(root, o);
    return config_from_json(root);
}

inline RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

}  // namespace decoyattack
