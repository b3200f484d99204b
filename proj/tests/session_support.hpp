#pragma once

#include <memory>
#include <string>

#include "tabverify/protocol.hpp"
#include "tabverify/samples.hpp"

namespace tabverify::testing {

inline std::shared_ptr<const protocol::DeveloperSetup> encrypt_graph(const std::string& src, std::uint64_t seed = 1) {
  Rng rng(seed);
  return protocol::vs_encrypt(16, table::parse_graph(src), {}, rng);
}

// Shared across test cases; the universal circuit build dominates setup time.
inline std::shared_ptr<const protocol::DeveloperSetup> worked_setup() {
  static const auto s = encrypt_graph(samples::worked_graph());
  return s;
}

inline std::vector<vga::CriticalPoint> worked_cp() {
  const auto spec = table::parse_graph(samples::worked_spec());
  return vga::critical_points_from_json(nlohmann::json::parse(samples::worked_critical_points()), spec);
}

inline protocol::VerifierConfig small_config(protocol::Mode mode, std::uint64_t coins, std::size_t budget = 4) {
  protocol::VerifierConfig cfg;
  cfg.mode = mode;
  cfg.suite.seed = coins;
  cfg.suite.budget = budget;
  cfg.coins = coins;
  cfg.session = "test-" + std::to_string(coins);
  return cfg;
}

// One full session against a local developer.
inline protocol::SessionResult run_session(std::shared_ptr<const protocol::DeveloperSetup> setup,
                                           const std::string& spec, const std::vector<vga::CriticalPoint>& cp,
                                           const protocol::VerifierConfig& cfg,
                                           protocol::Strategy strategy = protocol::Strategy::Honest,
                                           std::shared_ptr<protocol::EvalCache> cache = nullptr) {
  protocol::Developer dev(setup, strategy, cfg.coins, cache);
  protocol::LocalLink link(dev);
  return protocol::verify_session(setup->params, spec, cp, cfg, link, cache);
}

}  // namespace tabverify::testing
