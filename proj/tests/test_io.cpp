#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mtb/config.hpp"
#include "mtb/errors.hpp"
#include "mtb/report.hpp"

using namespace mtb;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("mtb_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config round trip and hashing") {
    RunConfig c;
    c.a = 1.0;
    c.b = 1.0 / 3.0;
    c.lambda_lo = 0.1 + 0.2;  // not representable in a short decimal
    c.lambda_hi = 7.0;
    c.lambda_n = 4;
    c.lambda_log = false;
    c.seeds = "p3:diagonal,p1";
    c.seed = 18446744073709551615ULL;
    c.grid = 128;
    RunConfig d = parse_config(to_text(c));
    CHECK(d == c);
    CHECK(config_hash(d) == config_hash(c));
    CHECK(to_text(d) == to_text(c));

    // formatting, order and comments do not change the hash
    RunConfig e = parse_config("# comment\nlambda_hi=7\n  seeds = p3:diagonal,p1  \nb = 0.33333333333333331\n"
                               "lambda_lo = 0.30000000000000004\nlambda_n = 4 # four\nlambda_log = false\n"
                               "seed = 18446744073709551615\ngrid = 128\n");
    CHECK(config_hash(e) == config_hash(c));
    e.grid = 130;
    CHECK(config_hash(e) != config_hash(c));

    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);

    CHECK(c.lambda_at(0) == c.lambda_lo);
    CHECK(c.lambda_at(3) == doctest::Approx(7.0).epsilon(1e-15));
    c.lambda_log = true;
    CHECK(c.lambda_at(1) == doctest::Approx(c.lambda_lo * std::pow(7.0 / c.lambda_lo, 1.0 / 3.0)));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config("nope = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("a 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("a = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("a = 1e999\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda_lo = 1\nlambda_hi = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("newton_tol = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid = 33\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seeds = p4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seeds = p1:triple\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lambda_log = maybe\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/mtb.cfg"), ConfigError);
}

TEST_CASE("seed selection") {
    CHECK(seed_selected("all", 2, BranchKind::pair));
    CHECK(seed_selected("p2", 2, BranchKind::pair));
    CHECK_FALSE(seed_selected("p2", 1, BranchKind::pair));
    CHECK(seed_selected("p1:diagonal, p3:pair_swapped", 3, BranchKind::pair_swapped));
    CHECK_FALSE(seed_selected("p1:diagonal, p3:pair_swapped", 3, BranchKind::pair));
}

TEST_CASE("report envelope") {
    setenv("SOURCE_DATE_EPOCH", "86400", 1);
    CHECK(timestamp_now() == "1970-01-02T00:00:00Z");
    RunConfig c;
    nlohmann::json a = make_envelope("green", c, timestamp_now(), {{"x", 0.1}});
    nlohmann::json b = make_envelope("green", c, timestamp_now(), {{"x", 0.1}});
    unsetenv("SOURCE_DATE_EPOCH");
    CHECK(a.dump() == b.dump());
    CHECK(a["config_hash"] == config_hash(c));
    CHECK(parse_config(a["config"].get<std::string>()) == c);
    CHECK(a["reports"]["x"].get<double>() == 0.1);

    auto dir = scratch("cols");
    write_columns((dir / "t.tsv").string(), {"x", "y"}, {{1.0, 0.1}, {2.0, 1.0 / 3.0}});
    std::ifstream f(dir / "t.tsv");
    std::string l0, l1, l2;
    std::getline(f, l0);
    std::getline(f, l1);
    std::getline(f, l2);
    CHECK(l0 == "# x\ty");
    CHECK(l1 == "1\t0.10000000000000001");
    CHECK(std::stod(l2.substr(2)) == 1.0 / 3.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("field files round trip") {
    PeriodicGrid g(TorusGeometry(1.0, 0.5), 32, 16);
    Field f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(0.37 * static_cast<double>(i)) * 1e-3 + 1.0 / 7.0;
    auto dir = scratch("field");
    const std::string base = (dir / "v").string();
    write_field(base, f, g, {{"lambda", 8.0}});
    FieldHeader h;
    Field r = read_field(base, &h);
    CHECK(r == f);
    CHECK(h.nx == 32);
    CHECK(h.ny == 16);
    CHECK(h.b == 0.5);
    CHECK(h.meta["lambda"].get<double>() == 8.0);
    CHECK(std::filesystem::file_size(base + ".bin") == g.size() * sizeof(double));

    std::filesystem::resize_file(base + ".bin", 8);
    CHECK_THROWS_AS(read_field(base), ConfigError);
    CHECK_THROWS_AS(write_field(base, Field(3), g), ConfigError);
    std::filesystem::remove_all(dir);
}
