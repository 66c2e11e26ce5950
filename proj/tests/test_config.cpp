#include <gtest/gtest.h>

#include <sstream>

#include "mcflow/config.hpp"

using namespace mcflow;
namespace fs = std::filesystem;

namespace {

template <class Fn>
std::string error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mcflow_config_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DuplicateKeyIsRejectedInStrictMode) {
  const std::string text = R"({"params": {"mu": 0.1, "mu": 0.2}})";
  EXPECT_EQ(error_code([&] { parse_json(text); }), "config.duplicate_key");
  EXPECT_NO_THROW(parse_json(text, false));
  // same key in sibling objects is fine
  EXPECT_NO_THROW(parse_json(R"({"a": {"x": 1}, "b": {"x": 2}})"));
}

TEST(Config, MalformedTextIsAParseError) {
  EXPECT_EQ(error_code([] { parse_json("{\"a\": }"); }), "config.parse_error");
}

TEST(Config, UnknownKeyIsRejected) {
  const Json j = parse_json(R"({"final_time": 1.0, "finaltime": 2.0})");
  EXPECT_EQ(error_code([&] { parse_simulate_config(j, "."); }), "config.unknown_key");
  EXPECT_NO_THROW(parse_simulate_config(j, ".", false));
  const Json nested = parse_json(R"({"params": {"mu": 0.1, "nu": 0.2}})");
  EXPECT_EQ(error_code([&] { parse_simulate_config(nested, "."); }), "config.unknown_key");
}

TEST(Config, WrongTypeIsRejected) {
  EXPECT_EQ(error_code([] { parse_simulate_config(parse_json(R"({"resolution": "big"})"), "."); }),
            "config.invalid_value");
  EXPECT_EQ(error_code([] { parse_simulate_config(parse_json(R"({"resolution": 2.5})"), "."); }),
            "config.invalid_value");
}

TEST(Config, SmallBetaNeedsOverride) {
  const Json low = parse_json(R"({"params": {"beta": 1.0}})");
  try {
    parse_simulate_config(low, ".");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "config.invalid_parameters");
    EXPECT_NE(std::string(e.what()).find("beta > 4/3, gamma > 1"), std::string::npos);
  }
  const Json gamma = parse_json(R"({"params": {"gamma": 1.0}})");
  EXPECT_EQ(error_code([&] { parse_simulate_config(gamma, "."); }), "config.invalid_parameters");
  const Json over = parse_json(R"({"params": {"beta": 1.0}, "allow_parameter_override": true})");
  EXPECT_DOUBLE_EQ(parse_simulate_config(over, ".").polar.params.beta, 1.0);
}

TEST(Config, MinimalAnnulusConfigEchoesDefaults) {
  const SimulateConfig c = parse_simulate_config(parse_json(R"({"domain": "annulus"})"), ".");
  EXPECT_FALSE(c.masked);
  const Json echo = to_json(c);
  EXPECT_EQ(echo["resolution"], 32);
  EXPECT_DOUBLE_EQ(echo["params"]["beta"].get<double>(), 1.5);
  EXPECT_EQ(echo["initial"]["preset"], "random-slip");
  EXPECT_EQ(echo["output"]["snapshots"], "none");
  // the echo parses back to the same config
  const SimulateConfig again = parse_simulate_config(echo, ".");
  EXPECT_EQ(config_hash(to_json(again)), config_hash(echo));
}

TEST(Config, GeneralCircularDomainUsesTheMaskedSolver) {
  const Json j = parse_json(R"({"domain": "three-holes", "friction": [0.0, 0.1, 0.2, 0.3], "initial": {"preset": "swirl"}})");
  const SimulateConfig c = parse_simulate_config(j, ".");
  EXPECT_TRUE(c.masked);
  ASSERT_EQ(c.masked_config.friction.size(), 4u);
  EXPECT_DOUBLE_EQ(c.masked_config.friction[3], 0.3);
  EXPECT_EQ(error_code([] { parse_simulate_config(parse_json(R"({"domain": "three-holes", "friction": [1, 2]})"), "."); }),
            "config.invalid_value");
}

TEST(Config, DomainFileShapes) {
  const Json circ = parse_json(R"({"outer": {"center": [1, 0], "radius": 2}, "holes": [{"center": [1.5, 0], "radius": 0.5}]})");
  const CircularDomain d = require_circular(parse_domain(circ));
  ASSERT_EQ(d.num_holes(), 1u);
  EXPECT_NEAR(std::abs(d.holes()[0].center - Complex(0.25, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(d.holes()[0].radius, 0.25, 1e-15);

  const Json smooth = parse_json(
      R"({"curves": [{"ellipse": {"center": [0, 0], "axes": [1.2, 0.9], "rotation": 0.3}}, {"circle": {"center": [0.1, 0], "radius": 0.3}}]})");
  const DomainSpec s = parse_domain(smooth);
  ASSERT_TRUE(std::holds_alternative<SmoothDomain>(s));
  EXPECT_EQ(std::get<SmoothDomain>(s).num_components(), 2u);
  EXPECT_TRUE(std::get<SmoothDomain>(s).contains(Complex(0.7, 0.0)));

  EXPECT_EQ(error_code([] { parse_domain(parse_json(R"({"holes": [{"center": [0, 0]}]})")); }), "config.invalid_value");
  EXPECT_EQ(error_code([] { parse_domain(parse_json(R"({"holes": [], "extra": 1})")); }), "config.unknown_key");
}

TEST(Config, MissingDomainFile) {
  EXPECT_EQ(error_code([] { resolve_domain("/nonexistent/domain.json"); }), "config.missing_file");
  EXPECT_EQ(error_code([] { parse_simulate_config(parse_json(R"({"domain": "nope.json"})"), "/nonexistent"); }),
            "config.missing_file");
}

TEST(Config, DomainRoundTripsThroughJson) {
  const DomainSpec d = resolve_domain("four-connected");
  const DomainSpec back = parse_domain(domain_to_json(d));
  const auto& a = std::get<CircularDomain>(d).holes();
  const auto& b = std::get<CircularDomain>(back).holes();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].center, b[k].center);
    EXPECT_EQ(a[k].radius, b[k].radius);
  }
}

TEST(Output, BinaryDumpLayoutAndRoundTrip) {
  Eigen::ArrayXXd f(2, 3);
  f << 1.0, -2.5, 3.0, 0.125, 1e-300, -0.0;
  const fs::path p = scratch("grid.bin");
  write_grid_binary(p, f);
  const std::string bytes = slurp(p);
  ASSERT_EQ(bytes.size(), 8u + 4u + 4u + 6u * 8u);
  EXPECT_EQ(bytes.substr(0, 8), "MCFLOWG1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 3u);
  // 1.0 = 0x3ff0000000000000, little endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 7]), 0x3fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 6]), 0xf0u);
  const Eigen::ArrayXXd g = read_grid_binary(p);
  ASSERT_EQ(g.rows(), 2);
  ASSERT_EQ(g.cols(), 3);
  EXPECT_TRUE((g == f).all());
  EXPECT_TRUE(std::signbit(g(1, 2)));
}

TEST(Output, CsvIsDeterministicAndFullPrecision) {
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  for (const auto& p : {a, b}) {
    CsvWriter w(p, {{"t", "time", "physical time"}, {"v", "1", "value"}});
    w.row({0.1, 1.0 / 3.0});
    w.row({0.2, -2e-17});
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a).find("# t [time]: physical time\n"), std::string::npos);
  EXPECT_NE(slurp(a).find("0.33333333333333331"), std::string::npos);
  CsvWriter w(scratch("c.csv"), {{"t", "time", "x"}});
  EXPECT_EQ(error_code([&] { w.row({1.0, 2.0}); }), "config.output_error");
}

TEST(Output, HashDependsOnContent) {
  const Json a = {{"x", 1}}, b = {{"x", 2}};
  EXPECT_EQ(config_hash(a), config_hash(Json{{"x", 1}}));
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(hex64(0x1234), "0000000000001234");
}

TEST(Output, SidecarCarriesHashSeedAndTimestamp) {
  const fs::path dir = scratch("side");
  fs::create_directories(dir);
  RunMetadata m;
  m.command = "measure";
  m.resolved = {{"modes", 24}};
  m.seed = 42;
  write_sidecar(dir, "measure", m);
  const Json meta = load_json(dir / "measure.meta.json");
  EXPECT_EQ(meta["config_hash"], hex64(config_hash(m.resolved)));
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_TRUE(meta.contains("timestamp"));
  EXPECT_EQ(meta["versions"]["mcflow"], library_version());
  EXPECT_EQ(load_json(dir / "measure.config.json"), m.resolved);
}
