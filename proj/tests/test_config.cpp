// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "decoyattack/config.hpp"

using namespace decoyattack;

namespace {

ConfigError config_error(std::string_view text, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config(text, overrides);
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "expected ConfigError for: " << text;
    return ConfigError("", "");
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    for (const char* text : {"", "  \n", "{}"}) {
        const RunConfig rc = parse_config(text);
        EXPECT_EQ(rc.source.mu, 0.5);
        EXPECT_EQ(rc.source.nu, 0.1);
        EXPECT_EQ(rc.loss_db(), default_loss_db);
        EXPECT_EQ(rc.usd_performance(), UsdPerformance{});
        EXPECT_EQ(rc.channel.gain_model, GainModel::with_background);
        EXPECT_EQ(rc.solver.n_trunc, 20u);
        EXPECT_FALSE(rc.solver.enforce_errors);
        EXPECT_EQ(rc.mc.seed, 748u);
    }
}

TEST(Config, FullDocument) {
    const RunConfig rc = parse_config(R"({
        "source": {"mu": 0.6, "nu": 0.2, "theta_s": 3.0},
        "channel": {"eta": 1e-4, "y0": 0, "e_d": 0.01, "gain_model": "signal_only"},
        "usd": {"q_mu": 0.01, "xi_nu": 0.9},
        "solver": {"n_trunc": 12, "enforce_errors": true},
        "sweep": {"start_db": 30, "end_db": 40, "step_db": 0.5},
        "mc": {"n_pulses": 1000, "seed": 1}
    })");
    EXPECT_EQ(rc.source_config().theta_s(), 3.0);
    EXPECT_NEAR(rc.loss_db(), 40.0, 1e-12);
    EXPECT_EQ(rc.channel_params().eta, 1e-4);
    EXPECT_EQ(rc.channel_params().gain_model, GainModel::signal_only);
    EXPECT_EQ(rc.usd_performance().q_mu, 0.01);
    EXPECT_EQ(rc.usd_performance().q_nu, UsdPerformance{}.q_nu);
    EXPECT_EQ(rc.usd_performance().xi_nu, 0.9);
    EXPECT_EQ(rc.analysis_options().n_trunc, 12u);
    EXPECT_TRUE(rc.analysis_options().enforce_errors);
    EXPECT_EQ(rc.sweep_range().grid().size(), 21u);
    EXPECT_EQ(rc.mc.n_pulses, 1000u);
}

TEST(Config, IntensityOrderNamesField) {
    EXPECT_EQ(config_error(R"({"source": {"mu": 0.1, "nu": 0.5}})").field(), "source.mu");
    EXPECT_EQ(config_error(R"({"source": {"mu": 0.1, "nu": 0.1}})").field(), "source.mu");
}

TEST(Config, LossAndEtaAreExclusive) {
    EXPECT_EQ(config_error(R"({"channel": {"loss_db": 30, "eta": 0.001}})").field(), "channel");
}

TEST(Config, RejectsUnknownAndMistypedFields) {
    EXPECT_EQ(config_error(R"({"source": {"mu": 0.5, "nue": 0.1}})").field(), "source.nue");
    EXPECT_EQ(config_error(R"({"sources": {}})").field(), "sources");
    EXPECT_EQ(config_error(R"({"source": {"mu": "big"}})").field(), "source.mu");
    EXPECT_EQ(config_error(R"({"usd": {"q_mu": 1.5}})").field(), "usd.q_mu");
    EXPECT_EQ(config_error(R"({"usd": {"ideal": "optimal", "q_mu": 0.1}})").field(), "usd.ideal");
    EXPECT_EQ(config_error(R"({"sweep": {"start_db": 40, "end_db": 40}})").field(), "sweep.end_db");
    EXPECT_EQ(config_error(R"({"solver": {"n_trunc": 0}})").field(), "solver.n_trunc");
}

TEST(Config, MalformedJsonReportsLine) {
    const ConfigError e = config_error("{\n  \"source\": {\n    \"mu\": 0.5,\n  }\n}");
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
}

TEST(Config, Overrides) {
    const RunConfig rc = parse_config(R"({"source": {"mu": 0.6}})",
                                      {"source.mu=0.4", "usd.ideal=optimal", "channel.loss_db=21.2",
                                       "solver.enforce_errors=true"});
    EXPECT_EQ(rc.source.mu, 0.4);
    EXPECT_EQ(rc.usd.ideal, UsdCeiling::optimal);
    EXPECT_NEAR(rc.usd_performance().q_mu, usd_success_optimal(SourceConfig(0.4, 0.1)), 1e-15);
    EXPECT_EQ(rc.usd_performance().xi_mu, 1.0);
    EXPECT_EQ(rc.loss_db(), 21.2);
    EXPECT_TRUE(rc.solver.enforce_errors);

    EXPECT_EQ(config_error("", {"source.mu"}).field(), "");
    EXPECT_EQ(config_error("", {"source.mu=0.05"}).field(), "source.mu");
}

TEST(Config, IdealLinearOptics) {
    const RunConfig rc = parse_config(R"({"usd": {"ideal": "linear_optics"}})");
    EXPECT_NEAR(rc.usd_performance().q_mu, 0.0187381554759348, 1e-15);
}

TEST(Config, LinkLossExcludesDetector) {
    const RunConfig rc = parse_config(R"({"channel": {"loss_db": 36.3}})");
    EXPECT_NEAR(rc.link_loss_db(), 36.3 - 13.0103, 1e-4);
}

TEST(Config, MissingFile) { EXPECT_THROW(parse_config_file("/nonexistent/decoyattack.json"), ConfigError); }
