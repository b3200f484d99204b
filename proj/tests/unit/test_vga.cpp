#include <functional>

#include "doctest.h"
#include "tabverify/samples.hpp"
#include "tabverify/vga.hpp"

using namespace tabverify;
using namespace tabverify::vga;

namespace {

table::TransformedGraph transformed(const std::string& src) { return table::transform(table::parse_graph(src)); }

// Independent oracle: count source-to-sink paths by plain recursion.
std::size_t count_paths(const table::StructureGraph& s) {
  std::function<std::size_t(std::size_t)> from = [&](std::size_t i) -> std::size_t {
    std::size_t n = s.is_sink(i) ? 1 : 0;
    for (std::size_t j : s.successors(i)) n += from(j);
    return n;
  };
  std::size_t total = 0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    if (s.is_source(i)) total += from(i);
  return total;
}

}  // namespace

TEST_CASE("paths of the worked example") {
  const auto tg = transformed(samples::worked_graph());
  const auto paths = enumerate_paths(tg.structure, 1000);
  // Four A rows feed two Z rows; the two B rows stand alone.
  CHECK(paths.size() == 10);
  CHECK(paths.size() == count_paths(tg.structure));
  for (const auto& p : paths) CHECK(is_path(tg.structure, p));
  CHECK(std::is_sorted(paths.begin(), paths.end()));
  CHECK(enumerate_paths(tg.structure, 3).size() == 3);
  CHECK_FALSE(is_path(tg.structure, {}));
  CHECK_FALSE(is_path(tg.structure, {0, 1}));  // siblings are not connected
}

TEST_CASE("paths of the chain and diamond") {
  for (const auto* src : {&samples::chain_graph(), &samples::diamond_graph()}) {
    const auto tg = transformed(*src);
    const auto paths = enumerate_paths(tg.structure, 1000);
    CHECK(paths.size() == count_paths(tg.structure));
    for (const auto& p : paths) CHECK(is_path(tg.structure, p));
  }
}

TEST_CASE("input domain") {
  const auto g = table::parse_graph(samples::worked_spec());
  const Domain d = input_domain(g.inputs, g.payload_bits());
  CHECK(d.size() == 101 * 2);
  CHECK(d.at(0) == table::Assignment{{"a", 0}, {"b", 0}});
  CHECK(d.at(1) == table::Assignment{{"a", 0}, {"b", 1}});
  CHECK(d.at(201) == table::Assignment{{"a", 100}, {"b", 1}});
  CHECK(d.contains({{"a", 46}, {"b", 1}}));
  CHECK_FALSE(d.contains({{"a", 101}, {"b", 1}}));
  CHECK_FALSE(d.contains({{"a", 1}}));
  Rng rng(1);
  for (int i = 0; i < 200; ++i) CHECK(d.contains(d.sample(rng)));
  // Undeclared ints span the signed payload.
  const Domain wide = input_domain({{"x", table::ValueType::Int, std::nullopt}}, 8);
  CHECK(wide.size() == 256);
  CHECK(wide.at(0).at("x") == -128);
}

TEST_CASE("suite generation is deterministic") {
  const auto tg = transformed(samples::worked_graph());
  const auto spec = table::parse_graph(samples::worked_spec());
  SuiteConfig cfg;
  cfg.seed = 7;
  const Suite a = generate_suite(tg.structure, spec, cfg);
  const Suite b = generate_suite(tg.structure, spec, cfg);
  CHECK(a.paths == b.paths);
  CHECK(a.inputs == b.inputs);
  CHECK(a.inputs.size() == a.paths.size());
  cfg.seed = 8;
  CHECK(generate_suite(tg.structure, spec, cfg).inputs != a.inputs);
  const Domain d = input_domain(spec.inputs, spec.payload_bits());
  for (const auto& x : a.inputs) CHECK(d.contains(x));
}

TEST_CASE("suite config json") {
  SuiteConfig cfg{kDevPathId, 3, 12};
  CHECK(SuiteConfig::from_json(cfg.to_json()) == cfg);
  CHECK(cfg.developer_paths());
  auto j = cfg.to_json();
  j["id"] = "no-such-generator";
  CHECK_THROWS_AS(SuiteConfig::from_json(j), FormatError);
}

TEST_CASE("critical points") {
  const auto spec = table::parse_graph(samples::worked_spec());
  const auto cp = critical_points_from_json(nlohmann::json::parse(samples::worked_critical_points()), spec);
  REQUIRE(cp.size() == 2);
  CHECK(critical_points_from_json(critical_points_to_json(cp, spec), spec) == cp);
  const std::vector<std::optional<table::Assignment>> results = {cp[0].y, std::nullopt};
  CHECK(check_critical_points(cp, results) == std::vector<bool>{true, false});
  table::Assignment wrong = cp[1].y;
  wrong["y2"] = *wrong["y2"] + 1;
  CHECK(check_critical_points(cp, {cp[0].y, wrong}) == std::vector<bool>{true, false});
  CHECK_THROWS(critical_points_from_json(nlohmann::json::parse(R"([{"x": {"a": 1}, "y": {"y1": true, "y2": 2}}])"), spec));
}

TEST_CASE("coverage report") {
  const std::vector<Observation> obs = {{0, Outcome::Top}, {0, Outcome::Bottom}, {1, Outcome::Bottom},
                                        {2, Outcome::Null}, {0, Outcome::Top}};
  const CoverageReport r = coverage_report(4, obs);
  REQUIRE(r.tables.size() == 4);
  CHECK(r.tables[0].top == 2);
  CHECK(r.tables[0].bottom == 1);
  CHECK(r.tables[2].null == 1);
  CHECK(r.tables[2].unreached());
  CHECK(r.tables[3].unreached());
  CHECK(r.covered() == std::vector<std::size_t>{0});
  CHECK(r.covered_ratio() == doctest::Approx(0.25));
  CHECK(r.anti_covered_ratio() == doctest::Approx(0.5));
  CHECK(r.render().find("PT1") != std::string::npos);
  CHECK(r.to_json().dump().find("PT4") != std::string::npos);
  CHECK(table_label(0) == "PT1");
}
