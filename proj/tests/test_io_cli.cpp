#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "boolution/experiments.hpp"
#include "boolution/io.hpp"
#include "oracles.hpp"

using namespace boolution;

TEST_CASE("function JSON round trip") {
    CounterStream rng = stream_for(71, 0, 0);
    std::vector<BooleanFitnessFunction> samples = {
        BooleanFitnessFunction::and_function(
            2, FitnessLandscape::weak_selection(0.1)),
        BooleanFitnessFunction::parity(3, FitnessLandscape::weak_selection(0.2)),
        BooleanFitnessFunction::waddington(10, 3, 1,
                                           FitnessLandscape::lethal()),
        BooleanFitnessFunction::tribes(2, 4,
                                       FitnessLandscape::weak_selection(0.1)),
        BooleanFitnessFunction::or_function(
            3, FitnessLandscape::weak_selection(0.3)),
        oracle::random_table(rng, 4, 0.15),
    };
    for (const auto& f : samples) {
        const auto back = parse_function_json(function_to_json(f));
        REQUIRE(back.n() == f.n());
        for (std::uint32_t m = 0; m < (1u << f.n()); ++m)
            CHECK(back.satisfied_mask(m) == f.satisfied_mask(m));
        CHECK(back.landscape().is_weak() == f.landscape().is_weak());
        if (f.landscape().is_weak())
            CHECK(back.landscape().epsilon() == f.landscape().epsilon());
    }
}

TEST_CASE("hex truth tables") {
    // AND2 satisfied only at mask 3: table value 0b1000 = 0x8
    const auto f = parse_function_json(R"({
        "n": 2, "family": "truth_table", "params": {"hex": "8"},
        "landscape": "weak", "epsilon": 0.1})");
    CHECK(f.satisfied_mask(3));
    CHECK_FALSE(f.satisfied_mask(0));
    CHECK_FALSE(f.satisfied_mask(1));
    CHECK_FALSE(f.satisfied_mask(2));

    CHECK_THROWS_AS(parse_function_json(R"({
        "n": 2, "family": "truth_table", "params": {"hex": "88"},
        "landscape": "weak", "epsilon": 0.1})"),
                    Error);
}

TEST_CASE("function file validation errors") {
    CHECK_THROWS_AS(parse_function_json("not json"), Error);
    CHECK_THROWS_AS(parse_function_json(R"({"n": 2, "family": "parity",
        "landscape": "weak", "epsilon": 0.1, "extra": 1})"),
                    Error);
    CHECK_THROWS_AS(parse_function_json(R"({"n": 2, "family": "mystery",
        "landscape": "weak", "epsilon": 0.1})"),
                    Error);
    CHECK_THROWS_AS(parse_function_json(R"({"n": 2, "family": "parity",
        "landscape": "weak"})"),
                    Error);
    CHECK_THROWS_AS(parse_function_json(R"({"n": 2, "family": "parity",
        "landscape": "lethal", "epsilon": 0.2})"),
                    Error);
    CHECK_THROWS_AS(parse_landscape("weak:abc"), Error);
    CHECK(parse_landscape("weak:0.25").epsilon() == 0.25);
    CHECK(parse_landscape("lethal").is_lethal());
}

TEST_CASE("mu0 and seed parsing") {
    const auto u = parse_mu0("uniform", 3);
    CHECK(u.size() == 3);
    CHECK(u[0] == 0.0);
    const auto v = parse_mu0("vertex:5", 3);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == -1.0);
    CHECK(v[2] == 1.0);
    const auto csv = parse_mu0("0.5,-0.25,0", 3);
    CHECK(csv[1] == -0.25);
    CHECK_THROWS_AS(parse_mu0("0.5,0.5", 3), Error);

    const auto r = parse_seed_range("3..17");
    CHECK(r.from == 3);
    CHECK(r.to == 17);
    CHECK(r.count() == 15);
    const auto single = parse_seed_range("9");
    CHECK(single.from == 9);
    CHECK(single.to == 9);
    CHECK_THROWS_AS(parse_seed_range("9..3"), Error);

    setenv("BOOLUTION_SEED", "123", 1);
    const auto forced = apply_seed_env(parse_seed_range("0..10"));
    CHECK(forced.from == 123);
    CHECK(forced.to == 123);
    unsetenv("BOOLUTION_SEED");
}

TEST_CASE("trajectory CSV is deterministic") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    const auto t1 = run_finite(parity2, ProductPoint::uniform(2), 20, 30, 4);
    const auto t2 = run_finite(parity2, ProductPoint::uniform(2), 20, 30, 4);
    std::ostringstream a, b;
    write_trajectory_csv(a, t1);
    write_trajectory_csv(b, t2);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("t,mu_1,mu_2,nu_1,nu_2,ext_mu,ext_nu,ext_mu_after,"
                        "linear_mass,sat_prob",
                        0) == 0);
}

TEST_CASE("experiment config parsing") {
    const std::string good = R"({
        "scenario": "fixation",
        "function": {"n": 2, "family": "parity",
                     "landscape": "weak", "epsilon": 0.2},
        "N": 10, "T": 500, "seeds": "0..7", "mu0": "uniform"})";
    const auto cfg = parse_experiment_config(good);
    CHECK(cfg.scenario == "fixation");
    CHECK(cfg.sample_size == 10);
    CHECK(cfg.steps == 500);
    CHECK(cfg.seeds.count() == 8);
    REQUIRE(cfg.function.has_value());
    CHECK(cfg.function->n() == 2);

    CHECK_THROWS_AS(parse_experiment_config(R"({"scenario": "fixation",
        "typo_key": 1})"),
                    Error);
    CHECK_THROWS_AS(parse_experiment_config("[]"), Error);
}

TEST_CASE("fixation scenario on a small ensemble") {
    const auto cfg = parse_experiment_config(R"({
        "scenario": "fixation",
        "function": {"n": 2, "family": "parity",
                     "landscape": "weak", "epsilon": 0.2},
        "N": 20, "T": 50000, "seeds": "0..19"})");
    const auto report = run_scenario(cfg);
    CHECK(report.all_pass());
    bool saw_fixed = false;
    for (const auto& [name, value] : report.stats) {
        if (name == "fixed_fraction") {
            saw_fixed = true;
            CHECK(value == format_double(1.0));
        }
    }
    CHECK(saw_fixed);
    // reports are reproducible byte for byte (wall time lives outside them)
    const auto again = run_scenario(cfg);
    std::ostringstream a, b;
    write_report_csv(a, report);
    write_report_csv(b, again);
    CHECK(a.str() == b.str());
    CHECK(report_to_json(report) == report_to_json(again));
}

TEST_CASE("monotone scenario rejects non-monotone input") {
    const auto parity2 = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.2));
    CHECK_THROWS_AS(
        scenario_monotone_bound(parity2, ProductPoint::uniform(2), 100),
        Error);
}

TEST_CASE("waddington scenario asserts the assimilation claims") {
    const auto report = scenario_waddington(10, 3, FitnessLandscape::lethal(),
                                            WaddingtonMode::infinite(), 10, 5);
    CHECK(report.all_pass());
    CHECK(report.table_rows.size() == 16);  // 15 generations + terminal row
}

TEST_CASE("linkage scenario and sweep") {
    const auto f = BooleanFitnessFunction::parity(
        2, FitnessLandscape::weak_selection(0.01));
    GenotypeDistribution p0({0.5, 0.0, 0.0, 0.5});
    const auto report = scenario_linkage(f, p0, 10, false);
    CHECK(report.all_pass());

    const auto cfg = parse_experiment_config(R"({
        "scenario": "fixation",
        "function": {"n": 2, "family": "parity",
                     "landscape": "weak", "epsilon": 0.2},
        "N": 10, "T": 20000, "seeds": "0..7"})");
    const auto cells = sweep(cfg, "N", {10, 20});
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].all_pass());
    CHECK(cells[1].all_pass());

    // a failing cell is recorded without aborting the sweep
    const auto bad = sweep(cfg, "N", {0, 10});
    REQUIRE(bad.size() == 2);
    CHECK_FALSE(bad[0].all_pass());
    CHECK(bad[1].all_pass());
}
