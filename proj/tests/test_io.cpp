#include "doctest.h"

#include "vcrystal/errors.hpp"
#include "vcrystal/io.hpp"

using namespace vcrystal;

TEST_CASE("config round trip")
{
    RunConfig c;
    c.n_vortices = 6;
    c.gamma = 5.0 / 12.0;
    c.viscosity = 2e-4;
    c.dt_policy = "adaptive";
    c.dump_fields = true;
    c.seed = 12345678901234ULL;
    c.directory = "runs/a b";
    const auto text = serialize_config(c);
    const auto d = parse_config(text);
    CHECK(serialize_config(d) == text);
    CHECK(d.gamma == c.gamma);
    CHECK(d.seed == c.seed);
    CHECK(d.directory == "runs/a b");
}

TEST_CASE("sections and comments")
{
    const auto c = parse_config("# demo\noutputs.image_dumps = true\n[crystal]\nn_vortices = 3  # triangle\ngamma = 1.5\n"
                                "[solver]\nn_grid = 256\n");
    CHECK(c.n_vortices == 3);
    CHECK(c.gamma == 1.5);
    CHECK(c.n_grid == 256);
    CHECK(c.image_dumps);
}

TEST_CASE("bad input is rejected")
{
    CHECK_THROWS_AS(parse_config("crystal.nvortices = 3\n"), UsageError);
    CHECK_THROWS_AS(parse_config("crystal.gamma = ten\n"), UsageError);
    CHECK_THROWS_AS(parse_config("solver.n_grid = 300\n"), UsageError);
    CHECK_THROWS_AS(parse_config("crystal.n_vortices = 1\n"), UsageError);
    CHECK_THROWS_AS(parse_config("solver.dt_policy = \"sometimes\"\n"), UsageError);
    CHECK_THROWS_AS(parse_config("just words\n"), UsageError);
    CHECK_THROWS_AS(parse_config("seed = -4\n"), UsageError);
}

TEST_CASE("full precision formatting")
{
    CHECK(fmt17(0.1) == "0.10000000000000001");
    CHECK(std::stod(fmt17(1.0 / 3.0)) == 1.0 / 3.0);
}
