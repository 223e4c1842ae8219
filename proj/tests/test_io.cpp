#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rdmc/io.hpp"

using namespace rdmc;

namespace {

template <class T>
T read_le(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof v);
  return v;
}

}  // namespace

TEST_CASE("snapshot header layout") {
  const GridSpec g({1.0, 2.0}, {3, 2});
  FieldState s{0.25, 0.1, {{1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1}}};
  std::ostringstream out;
  io::write_snapshot(out, s, g);
  const std::string b = out.str();
  CHECK(b.substr(0, 4) == "RDMC");
  CHECK(read_le<std::uint32_t>(b, 4) == io::kSnapshotVersion);
  CHECK(read_le<std::uint64_t>(b, 8) == 2);
  CHECK(read_le<std::uint64_t>(b, 16) == 3);
  CHECK(read_le<std::uint64_t>(b, 24) == 2);
  CHECK(read_le<std::uint64_t>(b, 32) == 2);
  CHECK(read_le<double>(b, 40) == 0.25);
  CHECK(read_le<double>(b, 48) == 0.1);
  CHECK(b.size() == 56 + 12 * 8);
  CHECK(read_le<double>(b, 56) == 1.0);
  CHECK(read_le<double>(b, 56 + 6 * 8) == 6.0);
}

TEST_CASE("snapshot round trip is bit exact") {
  const GridSpec g = GridSpec::interval(1.0, 5);
  FieldState s{1.0 / 3.0, 0.05, {{0.1, 1e-300, 3.5, 0.0, 2.0 / 7.0}}};
  std::stringstream buf;
  io::write_snapshot(buf, s, g);
  const auto back = io::read_snapshot(buf);
  CHECK(back.cells == std::vector<std::size_t>{5});
  CHECK(back.state.t == s.t);
  CHECK(back.state.eps == s.eps);
  CHECK(back.state.u == s.u);
}

TEST_CASE("corrupt snapshots are format errors") {
  const GridSpec g = GridSpec::interval(1.0, 3);
  FieldState s{0.0, 0.1, {{1, 2, 3}}};
  std::ostringstream out;
  io::write_snapshot(out, s, g);
  const std::string good = out.str();
  SUBCASE("magic") {
    std::string bad = good;
    bad[0] = 'X';
    std::istringstream in(bad);
    CHECK_THROWS_AS(io::read_snapshot(in), io::FormatError);
  }
  SUBCASE("version") {
    std::string bad = good;
    bad[4] = 99;
    std::istringstream in(bad);
    CHECK_THROWS_AS(io::read_snapshot(in), io::FormatError);
  }
  SUBCASE("truncated") {
    std::istringstream in(good.substr(0, good.size() - 3));
    CHECK_THROWS_AS(io::read_snapshot(in), io::FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(io::read_snapshot("/nonexistent/snap.bin"), io::FormatError); }
}

TEST_CASE("CSV mirror lists every cell") {
  const auto dir = test::scratch_dir("csv_mirror");
  const GridSpec g({1.0, 1.0}, {2, 2});
  FieldState s{0.5, 0.1, {{1, 2, 3, 4}}};
  io::write_snapshot_csv(dir / "s.csv", s, g);
  std::ifstream in(dir / "s.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 1 + 4);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("estimate rows quote ids with commas") {
  std::ostringstream out;
  io::write_estimate_header(out);
  io::write_estimate_row(out, {"renorm[i=0,M=1]", 0, 0.5, -1.0, 2.0, 3.0, true}, "00ff");
  const auto text = out.str();
  CHECK(text.find("estimate_id,i,T,value,bound,margin,verdict,params_hash\n") == 0);
  CHECK(text.find("\"renorm[i=0,M=1]\",1,0.5,-1,2,3,pass,00ff") != std::string::npos);
}

TEST_CASE("params hash is canonical") {
  const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2], "c": {"y": 2, "x": 1}})");
  const auto b = nlohmann::json::parse(R"({"c": {"x": 1, "y": 2}, "a": [1, 2], "b": 1})");
  CHECK(params_hash(a) == params_hash(b));
  CHECK(params_hash(a).size() == 16);
  auto c = a;
  c["b"] = 2;
  CHECK(params_hash(c) != params_hash(a));
  // Independent FNV-1a 64 over the sorted compact dump.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : a.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  CHECK(params_hash(a) == hex);
}

TEST_CASE("config parsing errors") {
  using nlohmann::json;
  CHECK_THROWS_AS(parse_config(json::object()), ConfigError);
  auto doc = test::fixture_json("reversible_ok");
  CHECK_NOTHROW(parse_config(doc));
  auto bad = doc;
  bad["grid"]["cells"] = {0};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["family"]["type"] = "nonsense";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["phi_specs"] = json::array({json{{"modes", {1}}, {"t_support", 5.0}}});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["init"] = json::array({doc["init"][0]});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["eps"] = "x";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent.json"), ConfigError);
}

TEST_CASE("config defaults and seed override") {
  auto doc = test::fixture_json("reversible_ok");
  const auto cfg = parse_config(doc);
  CHECK(cfg.seed == 7);
  CHECK(cfg.K_from_config == false);
  CHECK(cfg.system.K() == 0.0);
  CHECK(cfg.rho_specs.size() == 3);
  CHECK(cfg.phi_specs.size() == 4);
  const auto over = parse_config(doc, 99);
  CHECK(over.seed == 99);
  CHECK(params_hash(over.raw) != params_hash(cfg.raw));
}
