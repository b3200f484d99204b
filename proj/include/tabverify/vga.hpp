#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/common.hpp"
#include "tabverify/table.hpp"

namespace tabverify::vga {

// Paths plus one uniformly sampled spec-domain input per path.
inline constexpr const char* kSampleId = "paths-sample-v1";
// Paths realized by asking the developer for a covering input; falls back to
// the sampled input when the developer answers null.
inline constexpr const char* kDevPathId = "paths-devpath-v1";

struct SuiteConfig {
  std::string id = kSampleId;
  std::uint64_t seed = 1;
  std::size_t budget = 64;  // maximum number of paths

  bool developer_paths() const { return id == kDevPathId; }
  nlohmann::json to_json() const;
  // Throws FormatError for an unknown generator id.
  static SuiteConfig from_json(const nlohmann::json& j);
  bool operator==(const SuiteConfig&) const = default;
};

using Path = std::vector<std::size_t>;

// Simple paths from nodes reading an external input to nodes feeding an
// external output, in lexicographic order, at most `budget` of them.
std::vector<Path> enumerate_paths(const table::StructureGraph& s, std::size_t budget);
bool is_path(const table::StructureGraph& s, const Path& p);

// Per-port value ranges; bools are [0..1], undeclared ints span the payload.
struct Domain {
  std::vector<table::ExternalPort> ports;
  std::vector<table::Range> ranges;

  // Number of points, saturating at 2^62.
  std::uint64_t size() const;
  table::Assignment at(std::uint64_t index) const;  // lexicographic, first port most significant
  table::Assignment sample(Rng& rng) const;
  bool contains(const table::Assignment& x) const;
};

Domain input_domain(const std::vector<table::ExternalPort>& ports, int payload_bits);

struct Suite {
  std::vector<Path> paths;
  std::vector<table::Assignment> inputs;  // parallel to paths
};

// Deterministic in (structure, spec, config).
Suite generate_suite(const table::StructureGraph& s, const table::TableGraph& spec, const SuiteConfig& cfg);

struct CriticalPoint {
  table::Assignment x;
  table::Assignment y;
  bool operator==(const CriticalPoint&) const = default;
};

nlohmann::json critical_points_to_json(const std::vector<CriticalPoint>& cp, const table::TableGraph& spec);
std::vector<CriticalPoint> critical_points_from_json(const nlohmann::json& j, const table::TableGraph& spec);

// Pass iff the evaluated outputs exist and equal Y; null evaluation fails.
std::vector<bool> check_critical_points(const std::vector<CriticalPoint>& cp,
                                        const std::vector<std::optional<table::Assignment>>& results);

// Observable outcome of one table evaluation in a transcript.
enum class Outcome { Top, Bottom, Null };

struct Observation {
  std::size_t table = 0;
  Outcome outcome = Outcome::Null;
};

struct TableCoverage {
  std::size_t table = 0;
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t null = 0;

  bool covered() const { return top > 0; }
  bool anti_covered() const { return bottom > 0; }
  bool unreached() const { return top == 0 && bottom == 0; }
};

struct CoverageReport {
  std::vector<TableCoverage> tables;

  std::vector<std::size_t> covered() const;
  double covered_ratio() const;
  double anti_covered_ratio() const;
  nlohmann::json to_json() const;
  std::string render() const;  // plain-text table
};

CoverageReport coverage_report(std::size_t table_count, const std::vector<Observation>& observations);

// Public label of a transformed table.
std::string table_label(std::size_t index);

}  // namespace tabverify::vga
