#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/protocol.hpp"

namespace tabverify::sim {

// Public parameters of a fake graph with the real structure and budget.
struct SimSetup {
  table::TransformedGraph fake;
  he::KeyPair keys;
  protocol::PublicParams params;
};

// S1: random single-row tables with the port types of `structure`, compiled
// into the given universal budget and encrypted under fresh keys. The depth
// hint caps the fake expressions' nesting.
SimSetup s1_simulate(int K, const table::StructureGraph& structure, const circuit::UniversalBudget& budget, int depth_hint,
                     const protocol::EncryptConfig& cfg, Rng& rng);

// Size and shape facts a verifier sees without decrypting anything.
nlohmann::json public_metadata(const protocol::PublicParams& pp);

// Oracles O1 (encode), O2 (path) and O3 (checker) answering from the real
// plaintext tables and the mapping M instead of the HE secret key.
class OracleState : public protocol::DeveloperLink {
 public:
  // `pp` may be the real or a simulated encryption; `real` supplies the plaintext tables.
  OracleState(const protocol::PublicParams& pp, const table::TableGraph& real, std::uint64_t rng_seed,
              std::shared_ptr<protocol::EvalCache> cache = nullptr);

  // Verifier secret used by O3; a valid script encrypts this key as ct_sk.
  void set_verifier_key(const symcrypto::SeKey& sk) { sk_ = sk; }

  protocol::EncodeAnswer oracle_o1(const protocol::EncodeQuery& q);
  protocol::PathAnswer oracle_o2(const protocol::PathQuery& q);
  protocol::CommitAnswer oracle_o3(const protocol::CheckerQuery& q);
  protocol::RevealAnswer oracle_o3_open(const he::CtWord& ct_sk);

  protocol::EncodeAnswer encode(const protocol::EncodeQuery& q) override { return oracle_o1(q); }
  protocol::PathAnswer path(const protocol::PathQuery& q) override { return oracle_o2(q); }
  protocol::CommitAnswer checker(const protocol::CheckerQuery& q) override { return oracle_o3(q); }
  protocol::RevealAnswer proof(const he::CtWord& ct_sk) override { return oracle_o3_open(ct_sk); }

  std::size_t entries() const { return m_.size(); }

 private:
  // One M entry: encrypted words and the real plaintext behind them.
  struct Entry {
    bool q1 = false;
    std::size_t table = 0;
    std::size_t slot = 0;
    std::vector<he::CtWord> u;
    std::vector<he::CtWord> v;
    std::vector<table::TaggedValue> e;
    std::vector<table::TaggedValue> t;
  };
  struct Pending {
    protocol::CheckerQuery query;
    protocol::Slice slice;
    std::vector<commitment::Committer> committers;
  };
  bool valid(const he::CtWord& w, std::size_t bits) const;

  const protocol::PublicParams& pp_;
  table::TableGraph real_;
  table::TransformedGraph transformed_;
  Rng rng_;
  protocol::TableEvaluator evaluator_;
  symcrypto::SeKey sk_;
  std::vector<Entry> m_;
  std::optional<Pending> pending_;
};

// Deterministic adversary: evaluates one random input like the verifier,
// interleaving checker rounds, path requests and invalid queries.
struct ScriptConfig {
  std::uint64_t seed = 1;
  double checker_rate = 0.35;
  double invalid_rate = 0.15;
  double path_rate = 0.5;
};

struct Transcript {
  std::vector<std::string> entries;     // "query => answer" in wire JSON
  std::vector<std::string> observable;  // answers with ciphertexts reduced to their length
  std::map<std::string, std::size_t> branches;  // answer categories seen
};

// The SE key a script encrypts as ct_sk; O3 is given it.
symcrypto::SeKey script_key(const ScriptConfig& cfg, int K);

Transcript run_script(const ScriptConfig& cfg, const protocol::PublicParams& pp, protocol::DeveloperLink& dev,
                      std::shared_ptr<protocol::EvalCache> cache = nullptr);

enum class World { Real, Ideal };

struct Experiment {
  nlohmann::json metadata;
  Transcript transcript;
};

// Real: the honest developer on vs_encrypt(G). Ideal: the oracles on S1's fake graph.
Experiment run_experiment(World w, const table::TableGraph& g, const ScriptConfig& script, int K,
                          const protocol::EncryptConfig& cfg, std::uint64_t seed);

struct EquivalenceReport {
  std::size_t sequences = 0;
  std::size_t identical = 0;
  std::size_t answers = 0;
  std::map<std::string, std::size_t> branches;
  std::string first_difference;

  bool ok() const { return identical == sequences; }
};

// Runs each seeded script against the developer and the oracles on the same
// public parameters and compares every answer byte.
EquivalenceReport check_equivalence(std::shared_ptr<const protocol::DeveloperSetup> setup, std::size_t sequences,
                                    std::uint64_t seed, std::shared_ptr<protocol::EvalCache> cache = nullptr);

// Fixed distinguisher over public metadata only; returns |P[1|real] - P[1|ideal]|.
double metadata_advantage(const table::TableGraph& g, std::size_t pairs, int K, const protocol::EncryptConfig& cfg,
                          std::uint64_t seed);

}  // namespace tabverify::sim
