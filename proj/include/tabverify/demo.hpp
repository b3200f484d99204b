#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/audit.hpp"
#include "tabverify/protocol.hpp"

namespace tabverify::demo {

struct DemoConfig {
  std::string graph;  // implementation graph source
  std::string spec;   // requirements graph source
  std::string cp;     // critical points JSON
  table::Assignment input{{"a", 46}, {"b", 1}};
  std::string backend = "transparent";
  int K = 16;
  std::uint64_t seed = 1;
  std::size_t budget = 64;
};

// Worked example from the embedded samples.
DemoConfig worked_config();

struct DemoResult {
  protocol::SessionResult session;
  vga::CoverageReport coverage;
  std::set<std::size_t> covered;             // by the whole session
  std::set<std::size_t> expected_covered;    // plaintext trace over every evaluated input
  std::set<std::size_t> input_covered;       // the chosen input in the session
  std::set<std::size_t> input_truth;         // the chosen input in the plaintext trace
  table::Assignment truth;                   // plaintext outputs on the chosen input
  audit::AuditReport audit;                  // of the certificate after a save/load round trip
  nlohmann::json summary;

  bool coverage_ok() const { return covered == expected_covered && input_covered == input_truth; }
  bool ok() const { return session.accept && coverage_ok() && audit.ok; }
};

// General-mode session over a loopback transport with a serving developer thread.
DemoResult run_demo(const DemoConfig& cfg);

// Tables whose row predicate held in the plaintext trace of x.
std::set<std::size_t> plaintext_covered(const table::TransformedGraph& tg, const table::Assignment& x);

std::vector<std::string> labels(const std::set<std::size_t>& tables);

}  // namespace tabverify::demo
