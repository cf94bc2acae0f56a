#include <catch2/catch_amalgamated.hpp>

#include "cldbs/config.hpp"

using namespace cldbs;
using nlohmann::json;

TEST_CASE("empty document yields the default configuration") {
    const ExperimentConfig cfg = parse_experiment_config(json::object());
    CHECK(cfg.plant.mode == PlantMode::surrogate);
    CHECK(cfg.plant.seed == 42);
    CHECK(cfg.plant.severity == Severity::severe);
    CHECK(cfg.dsp.bandwidth == 8.0);
    CHECK(cfg.dsp.order == 4);
    CHECK(cfg.controller.kind == ControllerKind::onoff_lif);
    CHECK(cfg.controller.params.b_target == 0.104);
    CHECK(cfg.controller.params.t_low == 0.05207);
    CHECK(cfg.controller.waveform.frequency_hz == 130.0);
    CHECK(cfg.metrics.z_e == 500.0);
    CHECK(cfg.metrics.t_sim == 30.0);
    CHECK(cfg.metrics.burn_in == 2.0);
}

TEST_CASE("unknown keys are rejected with their path") {
    const json j = {{"plant", {{"surrogate", {{"bogus", 1.0}}}}}};
    try {
        parse_experiment_config(j);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("plant.surrogate.bogus") != std::string::npos);
    }

    try {
        parse_experiment_config(json{{"widgets", 1}});
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("$.widgets") != std::string::npos);
    }
}

TEST_CASE("out-of-range values are rejected with their path") {
    const json j = {{"plant", {{"surrogate", {{"i50", 9.0}}}}}};
    try {
        parse_experiment_config(j);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("plant.surrogate.i50") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_experiment_config(json{{"controller", {{"type", "pid"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_experiment_config(json{{"plant", {{"severity", "terrible"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_experiment_config(json{{"metrics", {{"t_sim", 1.0}}}}),
                    std::invalid_argument);
}

TEST_CASE("explicit values land in the right fields") {
    const json j = {
        {"plant",
         {{"mode", "surrogate"},
          {"seed", 7},
          {"severity", "mild"},
          {"surrogate", {{"i50", 1.2}, {"noise_amp", 0.0}}}}},
        {"dsp", {{"f_center", 22.0}}},
        {"controller", {{"type", "dual_lif"}, {"gain", 2.0}}},
        {"metrics", {{"t_sim", 10.0}}},
        {"output", {{"label", "trial"}}},
    };
    const ExperimentConfig cfg = parse_experiment_config(j);
    CHECK(cfg.plant.seed == 7);
    CHECK(cfg.plant.severity == Severity::mild);
    CHECK(cfg.plant.surrogate.i50 == 1.2);
    CHECK(cfg.plant.surrogate.noise_amp == 0.0);
    CHECK(cfg.dsp.f_center == 22.0);
    CHECK(cfg.controller.kind == ControllerKind::dual_lif);
    CHECK(cfg.controller.params.gain == 2.0);
    CHECK(cfg.metrics.t_sim == 10.0);
    CHECK(cfg.label == "trial");
}

TEST_CASE("network section applies the reduced scale before overrides") {
    const json j = {{"plant",
                     {{"mode", "network"},
                      {"network", {{"reduced_scale", 10}, {"n_thal", 20}}}}}};
    const ExperimentConfig cfg = parse_experiment_config(j);
    CHECK(cfg.plant.network.n_stn == 10);
    CHECK(cfg.plant.network.n_thal == 20);
    CHECK(cfg.plant.network.indeg.ctx_from_interneuron == 1);
}

TEST_CASE("config digest is stable and default-insensitive") {
    const ExperimentConfig a = parse_experiment_config(json::object());
    const ExperimentConfig b = parse_experiment_config(json{{"plant", {{"seed", 42}}}});
    CHECK(config_digest(a) == config_digest(b));  // 42 is the default seed

    const ExperimentConfig c = parse_experiment_config(json{{"plant", {{"seed", 43}}}});
    CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("missing config file raises an error naming the path") {
    try {
        load_experiment_config("/nonexistent/cfg.json");
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("/nonexistent/cfg.json") != std::string::npos);
    }
}
