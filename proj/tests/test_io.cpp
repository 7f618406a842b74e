#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "wgf/config.hpp"
#include "wgf/csv.hpp"
#include "wgf/errors.hpp"

using namespace wgf;

TEST_CASE("key-value parsing") {
  const auto kv = KeyValueConfig::parse(
      "# header comment\n"
      "experiment = LINEAR_QUARTIC\n"
      "n = 32   # trailing\n"
      "mu0=30.5\n"
      "\n"
      "name = \"has # and spaces\"\n"
      "particles = 5e5\n"
      "resample = true\n"
      "ns = 4, 8,16\n");
  CHECK(kv.get_string("experiment") == "LINEAR_QUARTIC");
  CHECK(kv.get_int("n") == 32);
  CHECK(kv.get_double("mu0") == 30.5);
  CHECK(kv.get_string("name") == "has # and spaces");
  CHECK(kv.get_int("particles") == 500000);
  CHECK(kv.get_bool("resample") == true);
  CHECK(kv.get_int_list("ns") == std::vector<std::int64_t>{4, 8, 16});
  CHECK_FALSE(kv.get_double("missing").has_value());
  CHECK(kv.unused_keys().empty());
}

TEST_CASE("key-value errors") {
  CHECK_THROWS_AS(KeyValueConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("= 3\n"), ConfigError);
  const auto kv = KeyValueConfig::parse("n = 3.5\nx = abc\nflag = maybe\n");
  CHECK_THROWS_AS(kv.get_int("n"), ConfigError);
  CHECK_THROWS_AS(kv.get_double("x"), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("flag"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/file.conf"), ConfigError);
  const auto typo = KeyValueConfig::parse("n = 3\nstesp = 4\n");
  (void)typo.get_int("n");
  CHECK(typo.unused_keys() == std::vector<std::string>{"stesp"});
}

TEST_CASE("numbers survive a CSV round trip") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CsvTable t{schema::trajectory, {}};
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng) * std::pow(10.0, 40.0 * u(rng));
    t.rows.push_back({std::to_string(i), format_number(x), format_number(1.0 / 3.0), format_number(-0.0)});
  }
  t.rows.push_back({"200", format_number(std::numeric_limits<double>::quiet_NaN()),
                    format_number(std::numeric_limits<double>::infinity()),
                    format_number(-std::numeric_limits<double>::infinity())});
  const std::string text = to_csv(t);
  const CsvTable back = parse_csv(text);
  require_schema(back, schema::trajectory);
  CHECK(back.rows == t.rows);
  CHECK(to_csv(back) == text);
  for (std::size_t r = 0; r < 200; ++r)
    CHECK(back.number(r, "t") == parse_number(t.rows[r][1]));
  CHECK(std::isnan(back.number(200, "t")));
  CHECK(back.number(200, "energy") == std::numeric_limits<double>::infinity());
  CHECK(back.number(200, "min_bias_gap") == -std::numeric_limits<double>::infinity());
  CHECK(parse_number(format_number(0.1)) == 0.1);
}

TEST_CASE("CSV validation") {
  CHECK_THROWS_AS(parse_csv(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("a,b\n\"1\",2\n"), std::invalid_argument);
  CsvTable bad{{"a"}, {{"x,y"}}};
  CHECK_THROWS_AS(to_csv(bad), std::invalid_argument);

  const CsvTable t = parse_csv("z,f,T_oracle\n1,2,3\n");
  try {
    require_schema(t, schema::mapping);
    FAIL("schema mismatch not reported");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("f_theta") != std::string::npos);
  }
  CHECK_THROWS_AS(t.column("nope"), std::invalid_argument);
  CHECK_THROWS_AS(parse_number("1.5x"), std::invalid_argument);
}

TEST_CASE("CSV files") {
  const auto dir = std::filesystem::temp_directory_path() / "wgf_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "errors.csv").string();
  CsvTable t{schema::errors, {{"LINEAR_QUADRATIC", "32", "both", "1", format_number(1.25e-5)}}};
  write_csv(path, t);
  const CsvTable back = read_csv(path);
  require_schema(back, schema::errors);
  CHECK(back.rows == t.rows);
  CHECK(back.number(0, "error") == 1.25e-5);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(read_csv(path));
}
