#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "cdiff/config.hpp"
#include "cdiff/csv.hpp"
#include "cdiff/errors.hpp"

using namespace cdiff;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/cdiff_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void write(const std::string& content) {
        std::ofstream out(path);
        out << content;
    }
};

}  // namespace

TEST_CASE("series csv round trip") {
    TempFile f("series.csv");
    std::vector<double> values{1.5, -0.25, 3.125};
    write_series_csv(f.path, values, 0.5);
    SeriesData back = read_series_csv(f.path);
    REQUIRE(back.values.size() == 3);
    // the file carries an (index, time, value) layout; the value column is last
    CHECK(back.values[0] == 1.5);
    CHECK(back.values[2] == 3.125);
}

TEST_CASE("csv ingestion variants") {
    SUBCASE("single column with header") {
        TempFile f("single.csv");
        f.write("vix\n12.5\n13.25\n");
        auto s = read_series_csv(f.path);
        REQUIRE(s.values.size() == 2);
        CHECK(s.values[1] == 13.25);
        CHECK(s.dates.empty());
    }
    SUBCASE("date column retained") {
        TempFile f("dated.csv");
        f.write("date,value\n1990-01-02,17.24\n1990-01-03,18.19\n");
        auto s = read_series_csv(f.path);
        REQUIRE(s.values.size() == 2);
        CHECK(s.dates.size() == 2);
        CHECK(s.dates[0] == "1990-01-02");
        CHECK(s.values[0] == 17.24);
    }
    SUBCASE("malformed row names its line") {
        TempFile f("bad.csv");
        f.write("1.0\n2.0\nnot_a_number\n");
        try {
            read_series_csv(f.path);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_series_csv("/tmp/definitely_not_here_1234.csv"), IoError);
    }
}

TEST_CASE("run config json round trip and validation") {
    TempFile f("config.json");
    f.write(R"({
      "subcommand": "simulate",
      "family": "cir",
      "theta": [0.7653, 1.1653],
      "phi": {"m": 0.0835, "v": 0.0358, "lambda": 0.5193, "tau": 25.3708},
      "rho1": 0.9921,
      "n": 500,
      "seed": 7,
      "out_dir": "/tmp"
    })");
    RunConfig cfg = load_run_config(f.path);
    cfg.subcommand = "simulate";
    finalize_run_config(cfg);
    CHECK(cfg.delta == doctest::Approx(-std::log(0.9921) / 0.7653));
    CHECK(cfg.phi.has_value());
    CHECK(cfg.phi->lambda == 0.5193);
    CHECK(*cfg.seed == 7);

    std::string echoed = run_config_to_json(cfg);
    CHECK(echoed.find("0.9921") != std::string::npos);
}

TEST_CASE("config validation failures") {
    RunConfig cfg;
    cfg.subcommand = "simulate";
    cfg.family = "ou";
    cfg.delta = 0.0;
    cfg.rho1 = 0.0;
    CHECK_THROWS_AS(finalize_run_config(cfg), ConfigError);

    RunConfig cfg2;
    cfg2.subcommand = "mc-tables";
    cfg2.family = "ou";
    cfg2.delta = 0.1;
    cfg2.seed.reset();  // randomized subcommands demand a seed
    CHECK_THROWS_AS(finalize_run_config(cfg2), ConfigError);

    RunConfig cfg3;
    cfg3.subcommand = "fit";
    cfg3.family = "weibull";
    CHECK_THROWS_AS(finalize_run_config(cfg3), ConfigError);
}

TEST_CASE("mc-tables defaults cover the full scenario grid") {
    RunConfig cfg;
    cfg.subcommand = "mc-tables";
    cfg.family = "ou";
    cfg.delta = 0.01;
    cfg.seed = 3;
    finalize_run_config(cfg);
    CHECK(cfg.scenarios.size() == 8);  // 4 persistence levels x 2 sample sizes
    CHECK(cfg.scenarios[0].kappa == 1.1376);
    CHECK(cfg.scenarios.back().n == 5505);
}

TEST_CASE("model spec serialization round trip") {
    auto cir = UpdModel::cir(0.9, 1.3, 0.8);
    TransitionDensitySpec spec = TransitionDensitySpec::auto_for(cir, 0.25);
    std::string text = model_to_json(cir, spec);
    auto [back, back_spec] = model_from_json(text);
    CHECK(back.kind() == UpdKind::CIR);
    CHECK(back.theta() == cir.theta());
    CHECK(back_spec.method == TransitionMethod::ClosedFormBessel);
    CHECK(back_spec.delta == 0.25);
    CHECK(back.drift(0.7) == doctest::Approx(cir.drift(0.7)));

    auto nld = UpdModel::nldcev({0.3, 0.5, -0.6}, 1, 1, 0.5, 0.4);
    auto [nld_back, nld_spec] = model_from_json(model_to_json(nld, {TransitionMethod::EulerSubstep, 0.1, 8}));
    CHECK(nld_back.drift(1.3) == doctest::Approx(nld.drift(1.3)));
    CHECK(nld_spec.substeps == 8);

    auto mir = UpdModel::mirrored(cir);
    auto [mir_back, mir_spec] = model_from_json(model_to_json(mir, spec));
    (void)mir_spec;
    CHECK(mir_back.is_mirrored());
    CHECK(mir_back.drift(-0.7) == doctest::Approx(mir.drift(-0.7)));

    CHECK_THROWS_AS(model_from_json("{ not json"), ConfigError);
}
