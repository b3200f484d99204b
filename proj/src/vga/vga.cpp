#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>

#include "tabverify/vga.hpp"

namespace tabverify::vga {

nlohmann::json SuiteConfig::to_json() const { return {{"id", id}, {"seed", seed}, {"budget", budget}}; }

SuiteConfig SuiteConfig::from_json(const nlohmann::json& j) {
  SuiteConfig c;
  try {
    c.id = j.at("id").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.budget = j.at("budget").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed generator config: ") + e.what());
  }
  if (c.id != kSampleId && c.id != kDevPathId) throw FormatError("unknown test generator '" + c.id + "'");
  return c;
}

namespace {

bool reads_external(const table::StructNode& n) {
  return std::any_of(n.inputs.begin(), n.inputs.end(), [](const auto& s) { return s.external; });
}

bool feeds_external(const table::StructNode& n) {
  return std::any_of(n.outputs.begin(), n.outputs.end(), [](const auto& s) { return s.external_name.has_value(); });
}

}  // namespace

std::vector<Path> enumerate_paths(const table::StructureGraph& s, std::size_t budget) {
  std::vector<Path> out;
  if (budget == 0) return out;
  Path current;
  std::vector<char> on_path(s.nodes.size(), 0);
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    if (out.size() >= budget) return;
    current.push_back(v);
    on_path[v] = 1;
    if (feeds_external(s.nodes[v])) out.push_back(current);
    std::vector<std::size_t> next = s.successors(v);
    std::sort(next.begin(), next.end());
    for (auto w : next)
      if (!on_path[w]) walk(w);
    on_path[v] = 0;
    current.pop_back();
  };
  for (std::size_t v = 0; v < s.nodes.size(); ++v)
    if (reads_external(s.nodes[v])) walk(v);
  return out;
}

bool is_path(const table::StructureGraph& s, const Path& p) {
  if (p.empty()) return false;
  for (auto v : p)
    if (v >= s.nodes.size()) return false;
  for (std::size_t k = 0; k + 1 < p.size(); ++k)
    if (!s.has_edge(p[k], p[k + 1])) return false;
  return true;
}

std::uint64_t Domain::size() const {
  const std::uint64_t cap = std::uint64_t{1} << 62;
  std::uint64_t n = 1;
  for (const auto& r : ranges) {
    const auto width = static_cast<std::uint64_t>(r.hi - r.lo + 1);
    if (n > cap / width) return cap;
    n *= width;
  }
  return n;
}

table::Assignment Domain::at(std::uint64_t index) const {
  table::Assignment a;
  for (std::size_t k = ports.size(); k-- > 0;) {
    const auto width = static_cast<std::uint64_t>(ranges[k].hi - ranges[k].lo + 1);
    a[ports[k].name] = ranges[k].lo + static_cast<std::int64_t>(index % width);
    index /= width;
  }
  return a;
}

table::Assignment Domain::sample(Rng& rng) const {
  table::Assignment a;
  for (std::size_t k = 0; k < ports.size(); ++k) {
    const auto width = static_cast<std::uint64_t>(ranges[k].hi - ranges[k].lo + 1);
    a[ports[k].name] = ranges[k].lo + static_cast<std::int64_t>(rng.below(width));
  }
  return a;
}

bool Domain::contains(const table::Assignment& x) const {
  for (std::size_t k = 0; k < ports.size(); ++k) {
    auto it = x.find(ports[k].name);
    if (it == x.end() || !it->second) return false;
    if (*it->second < ranges[k].lo || *it->second > ranges[k].hi) return false;
  }
  return true;
}

Domain input_domain(const std::vector<table::ExternalPort>& ports, int payload_bits) {
  Domain d;
  d.ports = ports;
  const std::int64_t lo = -(std::int64_t{1} << (payload_bits - 1));
  const std::int64_t hi = (std::int64_t{1} << (payload_bits - 1)) - 1;
  for (const auto& p : ports) {
    if (p.type == table::ValueType::Bool)
      d.ranges.push_back({0, 1});
    else
      d.ranges.push_back(p.range.value_or(table::Range{lo, hi}));
  }
  return d;
}

Suite generate_suite(const table::StructureGraph& s, const table::TableGraph& spec, const SuiteConfig& cfg) {
  Suite suite;
  suite.paths = enumerate_paths(s, cfg.budget);
  const Domain d = input_domain(spec.inputs, spec.payload_bits());
  Rng rng(cfg.seed);
  for (std::size_t k = 0; k < suite.paths.size(); ++k) suite.inputs.push_back(d.sample(rng));
  return suite;
}

nlohmann::json critical_points_to_json(const std::vector<CriticalPoint>& cp, const table::TableGraph& spec) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : cp)
    arr.push_back({{"x", table::assignment_to_json(p.x, spec.inputs)}, {"y", table::assignment_to_json(p.y, spec.outputs)}});
  return arr;
}

std::vector<CriticalPoint> critical_points_from_json(const nlohmann::json& j, const table::TableGraph& spec) {
  if (!j.is_array()) throw FormatError("critical points must be a JSON array");
  std::vector<CriticalPoint> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("x") || !e.contains("y"))
      throw FormatError("critical point needs \"x\" and \"y\"");
    out.push_back({table::assignment_from_json(e.at("x"), spec.inputs),
                   table::assignment_from_json(e.at("y"), spec.outputs)});
  }
  return out;
}

std::vector<bool> check_critical_points(const std::vector<CriticalPoint>& cp,
                                        const std::vector<std::optional<table::Assignment>>& results) {
  std::vector<bool> out;
  for (std::size_t k = 0; k < cp.size(); ++k) {
    if (k >= results.size() || !results[k]) {
      out.push_back(false);
      continue;
    }
    bool ok = true;
    for (const auto& [name, value] : cp[k].y) {
      auto it = results[k]->find(name);
      ok = ok && it != results[k]->end() && it->second.has_value() && it->second == value;
    }
    out.push_back(ok);
  }
  return out;
}

std::string table_label(std::size_t index) { return "PT" + std::to_string(index + 1); }

CoverageReport coverage_report(std::size_t table_count, const std::vector<Observation>& observations) {
  CoverageReport r;
  for (std::size_t i = 0; i < table_count; ++i) r.tables.push_back({i, 0, 0, 0});
  for (const auto& o : observations) {
    if (o.table >= table_count) continue;
    auto& t = r.tables[o.table];
    if (o.outcome == Outcome::Top) ++t.top;
    else if (o.outcome == Outcome::Bottom) ++t.bottom;
    else ++t.null;
  }
  return r;
}

std::vector<std::size_t> CoverageReport::covered() const {
  std::vector<std::size_t> out;
  for (const auto& t : tables)
    if (t.covered()) out.push_back(t.table);
  return out;
}

double CoverageReport::covered_ratio() const {
  if (tables.empty()) return 0;
  return static_cast<double>(covered().size()) / static_cast<double>(tables.size());
}

double CoverageReport::anti_covered_ratio() const {
  if (tables.empty()) return 0;
  const auto n = std::count_if(tables.begin(), tables.end(), [](const auto& t) { return t.anti_covered(); });
  return static_cast<double>(n) / static_cast<double>(tables.size());
}

nlohmann::json CoverageReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : tables)
    arr.push_back({{"table", table_label(t.table)},
                   {"covered", t.covered()},
                   {"anti_covered", t.anti_covered()},
                   {"unreached", t.unreached()},
                   {"top", t.top},
                   {"bottom", t.bottom},
                   {"null", t.null}});
  return {{"tables", arr}, {"covered_ratio", covered_ratio()}, {"anti_covered_ratio", anti_covered_ratio()}};
}

std::string CoverageReport::render() const {
  std::ostringstream out;
  out << std::left << std::setw(8) << "table" << std::setw(10) << "covered" << std::setw(14) << "anti-covered"
      << std::setw(6) << "top" << std::setw(8) << "bottom" << "null\n";
  for (const auto& t : tables)
    out << std::setw(8) << table_label(t.table) << std::setw(10) << (t.covered() ? "yes" : "no") << std::setw(14)
        << (t.anti_covered() ? "yes" : "no") << std::setw(6) << t.top << std::setw(8) << t.bottom << t.null << "\n";
  out << "covered " << covered().size() << "/" << tables.size() << "\n";
  return out.str();
}

}  // namespace tabverify::vga
