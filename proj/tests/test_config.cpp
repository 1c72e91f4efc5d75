#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "weakam/config.hpp"

using namespace weakam;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    std::string path = std::string("cfg_") + name + ".toml";
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

} // namespace

TEST_CASE("config text parsing: sections, arrays, strings, comments") {
    ConfigMap m = parse_config_text("# header comment\n"
                                    "c = 0.5      # drift\n"
                                    "alpha = 1.0\n"
                                    "[damping]\n"
                                    "kind = \"fourier\"\n"
                                    "coeffs = [0.5, 0.3, 0.0]\n"
                                    "[grid]\n"
                                    "nx = 64\n"
                                    "nt = 32\n");
    CHECK(m.at("c").num == doctest::Approx(0.5));
    CHECK(m.at("damping.kind").str == "fourier");
    REQUIRE(m.at("damping.coeffs").arr.size() == 3);
    CHECK(m.at("damping.coeffs").arr[1] == doctest::Approx(0.3));
    CHECK(m.at("grid.nx").num == doctest::Approx(64));

    CHECK_THROWS_AS(parse_config_text("key value-without-equals\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[unclosed\n"), ConfigError);
}

TEST_CASE("run config: construction and unknown keys") {
    ConfigMap m = parse_config_text("c = 0.25\n"
                                    "alpha = 1.0\n"
                                    "seed = 7\n"
                                    "[damping]\n"
                                    "kind = \"constant\"\n"
                                    "coeffs = [0.5]\n"
                                    "[potential]\n"
                                    "kind = \"cosine\"\n"
                                    "coeffs = [1.0]\n"
                                    "[grid]\n"
                                    "nx = 32\n"
                                    "nt = 16\n"
                                    "v_max = 2.5\n");
    RunConfig rc = build_run_config(m);
    CHECK(rc.model.c() == doctest::Approx(0.25));
    CHECK(rc.model.alpha() == doctest::Approx(1.0));
    CHECK(rc.model.damping().mean() == doctest::Approx(0.5));
    CHECK(rc.model.potential().c0_norm() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rc.grid.nx == 32);
    CHECK(rc.grid.v_max == doctest::Approx(2.5));
    CHECK(rc.seed == 7);

    m["bogus_key"] = parse_config_value("1.0");
    CHECK_THROWS_AS(build_run_config(m), ConfigError);
}

TEST_CASE("load_run_config: file errors name the path, overrides win") {
    CHECK_THROWS_WITH_AS(load_run_config("no_such_file.toml"),
                         doctest::Contains("no_such_file.toml"), ConfigError);

    std::string path = write_temp("override", "c = 0.1\nalpha = 0.5\n"
                                              "[damping]\nkind = \"constant\"\ncoeffs = [0.4]\n");
    RunConfig rc = load_run_config(path, {{"alpha", "2.0"}, {"grid.nx", "64"}});
    CHECK(rc.model.alpha() == doctest::Approx(2.0)); // flag beats file
    CHECK(rc.model.c() == doctest::Approx(0.1));
    CHECK(rc.grid.nx == 64);
    std::remove(path.c_str());
}

TEST_CASE("sampled damping through the config") {
    ConfigMap m = parse_config_text("[damping]\nkind = \"samples\"\n"
                                    "samples = [0.5, 0.6, 0.5, 0.4, 0.5, 0.6, 0.5, 0.4]\n");
    RunConfig rc = build_run_config(m);
    CHECK(rc.model.damping().mean() == doctest::Approx(0.5).epsilon(1e-9));
}
