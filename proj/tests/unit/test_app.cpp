#include <doctest.h>

#include <cstdlib>

#include "crlab/app.hpp"
#include "crlab/calculus.hpp"
#include "crlab/embedding.hpp"
#include "crlab/numerics.hpp"

using namespace crlab;
using app::json;

TEST_CASE("config parsing") {
    const app::RunConfig d = app::parse_config(json::object());
    CHECK(d.model.p == 1.0);
    CHECK(d.k_grid.size() == 4);
    CHECK(d.seed == 7);

    json j = json::parse(R"({"model": {"p": 2, "q": 3, "delta1": 0.1, "delta2": 0.9},
                             "samples": {"scheme": "quasi-random", "seed": 11}, "jobs": 2})");
    const app::RunConfig c = app::parse_config(j);
    CHECK(c.model.q == 3.0);
    CHECK(c.scheme == SampleScheme::QuasiRandom);
    CHECK(c.seed == 11);
    CHECK(c.jobs == 2);
    const app::RunConfig again = app::parse_config(app::to_json(c));
    CHECK(app::to_json(again) == app::to_json(c));

    CHECK_THROWS_AS(app::parse_config(json::parse(R"({"modle": {}})")), app::ConfigError);
    CHECK_THROWS_AS(app::parse_config(json::parse(R"({"model": {"delta1": 0.8, "delta2": 0.5}})")),
                    app::ConfigError);
    CHECK_THROWS_AS(app::parse_config(json::parse(R"({"k_grid": [32, 16, 64]})")), app::ConfigError);
    CHECK_THROWS_AS(app::parse_config(json::parse(R"({"model": {"p": "one"}})")), app::ConfigError);
    CHECK_THROWS_AS(app::load_config("/nonexistent/config.json"), app::ConfigError);
}

TEST_CASE("csv rendering") {
    CHECK(app::format_double(0.1) == "0.10000000000000001");
    CHECK(app::format_double(1.0) == "1");
    CHECK(std::strtod(app::format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
    const app::CsvTable t{"x.csv", {"a", "b"}, {{"1", "2"}, {"3", "4"}}};
    CHECK(t.render() == "a,b\n1,2\n3,4\n");
}

TEST_CASE("error records and exit codes") {
    const app::ConfigError ce("bad");
    CHECK(app::error_record(ce, "embed")["error"]["kind"] == "config");
    CHECK(app::error_record(ce, "embed")["error"]["subcommand"] == "embed");
    CHECK(app::exit_status(ce) == 2);
    const TruncationError te("cap");
    CHECK(app::error_record(te, "kernel")["error"]["kind"] == "spectrum-cap");
    CHECK(app::exit_status(te) == 3);
    const numerics::BracketError be("bracket");
    CHECK(app::exit_status(be) == 4);
    const std::runtime_error re("other");
    CHECK(app::error_record(re, "all")["error"]["kind"] == "internal");
    CHECK(app::exit_status(re) == 1);
    app::RunConfig c;
    CHECK_THROWS_AS(app::run("nope", c), app::ConfigError);
}

TEST_CASE("spectrum and example subcommands in memory") {
    app::RunConfig c;
    c.model.resolution = 16;
    const app::RunOutput s = app::run("spectrum", c);
    const auto* c10 = s.criterion(10);
    REQUIRE(c10 != nullptr);
    CHECK(c10->pass);
    bool has_spectrum = false;
    for (const auto& t : s.tables) has_spectrum |= t.file == "spectrum.csv";
    CHECK(has_spectrum);

    const app::RunOutput e = app::run("example", c);
    REQUIRE(e.criterion(8) != nullptr);
    CHECK(e.criterion(8)->pass);
}

TEST_CASE("too small k grid is a solver error") {
    app::RunConfig c;
    c.model.resolution = 16;
    c.k_grid = {3};
    c.sample_count = 16;
    c.pair_count = 16;
    try {
        app::run("embed", c);
        FAIL("expected a failure");
    } catch (const std::exception& ex) {
        CHECK(app::exit_status(ex) == 4);
    }
}
