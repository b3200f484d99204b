#include "doctest.h"
#include "session_support.hpp"
#include "tabverify/sim.hpp"

using namespace tabverify;
using namespace tabverify::sim;

TEST_CASE("simulated parameters share the public metadata") {
  const auto s = testing::worked_setup();
  Rng rng(31);
  const SimSetup fake = s1_simulate(16, s->params.structure, s->params.budget, 4, {}, rng);
  CHECK(public_metadata(fake.params) == public_metadata(s->params));
  CHECK(fake.params.programs.size() == s->params.programs.size());
  CHECK(fake.params.programs != s->params.programs);
  CHECK(fake.params.digest() != s->params.digest());
  Rng rng2(32);
  const SimSetup other = s1_simulate(16, s->params.structure, s->params.budget, 4, {}, rng2);
  CHECK(other.params.programs != fake.params.programs);
}

TEST_CASE("developer and oracles answer identically") {
  const auto r = check_equivalence(testing::worked_setup(), 40, 33);
  CHECK(r.sequences == 40);
  CHECK_MESSAGE(r.ok(), r.first_difference);
  CHECK(r.answers > 0);
  // Every answer category shows up, null answers included.
  for (const char* b : {"q1", "q1-null", "q2-top", "q2-bottom", "q2-null", "path", "commit", "commit-null", "reveal",
                        "reveal-null"})
    CHECK_MESSAGE(r.branches.count(b) == 1, b);
}

TEST_CASE("equivalence holds on the chain and diamond") {
  for (const auto* src : {&samples::chain_graph(), &samples::diamond_graph()}) {
    const auto r = check_equivalence(testing::encrypt_graph(*src), 15, 34);
    CHECK_MESSAGE(r.ok(), r.first_difference);
  }
}

TEST_CASE("oracle answers validate queries") {
  const auto s = testing::worked_setup();
  OracleState o(s->params, s->graph, 35);
  protocol::EncodeQuery q{protocol::QueryKind::Q1, 0, 0, table::TaggedValue::bottom().to_bits(16), {}, {}};
  CHECK(o.oracle_o1(q).null);
  CHECK(o.entries() == 0);
  q.word = table::TaggedValue::of(12).to_bits(16);
  CHECK_FALSE(o.oracle_o1(q).null);
  CHECK(o.entries() == 1);
  CHECK_FALSE(o.oracle_o2({{0, 1}}).has_value());
  CHECK(o.oracle_o2({{0, 4}}).has_value());
  CHECK_FALSE(o.oracle_o3_open(s->params.programs[0]).has_value());
}

TEST_CASE("real and ideal experiments look alike") {
  const auto g = table::parse_graph(samples::worked_graph());
  ScriptConfig sc;
  sc.seed = 36;
  const auto real = run_experiment(World::Real, g, sc, 16, {}, 36);
  const auto ideal = run_experiment(World::Ideal, g, sc, 16, {}, 36);
  CHECK(real.metadata == ideal.metadata);
  CHECK(real.transcript.observable == ideal.transcript.observable);
  CHECK(real.transcript.entries != ideal.transcript.entries);  // different ciphertexts
  CHECK(metadata_advantage(g, 20, 16, {}, 37) < 0.1);
}
