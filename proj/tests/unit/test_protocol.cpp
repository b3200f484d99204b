#include <thread>

#include "doctest.h"
#include "session_support.hpp"
#include "tabverify/audit.hpp"
#include "tabverify/protocol.hpp"

using namespace tabverify;
using namespace tabverify::protocol;

namespace {

const std::string& spec() { return samples::worked_spec(); }

// Decrypts one recorded word with the developer's key and reads it as a tagged value.
table::TaggedValue shadow(const DeveloperSetup& s, const he::CtWord& w, table::ValueType type) {
  return table::TaggedValue::from_bits(he::dec_word(*s.keys.sk, w), type);
}

}  // namespace

TEST_CASE("honest sessions accept in both modes") {
  const auto s = testing::worked_setup();
  for (Mode mode : {Mode::Honest, Mode::General}) {
    const auto r = testing::run_session(s, spec(), testing::worked_cp(), testing::small_config(mode, 2));
    CHECK(r.accept);
    CHECK(r.certificate.failures.empty());
    CHECK(r.certificate.results.size() == r.runs.size());
    for (const auto& res : r.certificate.results) CHECK(res.ok);
    if (mode == Mode::General) CHECK_FALSE(r.certificate.qa_c.empty());
    else CHECK(r.certificate.qa_c.empty());
  }
}

TEST_CASE("encrypted evaluation shadows the plaintext trace") {
  const auto s = testing::worked_setup();
  Developer dev(s);
  LocalLink link(dev);
  link.open("shadow");
  Verifier v(s->params, spec(), {}, testing::small_config(Mode::General, 3));
  const auto& st = s->params.structure;
  for (std::int64_t a : {0, 10, 24, 25, 30, 31, 46, 50, 51, 100}) {
    for (std::int64_t b : {0, 1}) {
      const table::Assignment x{{"a", a}, {"b", b}};
      const EvalResult r = v.eval_encrypted(link, x);
      const table::PlainResult plain = table::evaluate_plain(s->transformed, x);
      CHECK(r.y == plain.outputs);
      REQUIRE(r.tables.size() == plain.trace.size());
      for (std::size_t i = 0; i < r.tables.size(); ++i) {
        CHECK(r.tables[i].evaluated == plain.trace[i].evaluated);
        if (!r.tables[i].evaluated) continue;
        for (std::size_t k = 0; k < r.tables[i].inputs.size(); ++k)
          CHECK(shadow(*s, r.tables[i].inputs[k], st.nodes[i].inputs[k].type) == plain.trace[i].inputs[k]);
        for (std::size_t k = 0; k < r.tables[i].outputs.size(); ++k)
          CHECK(shadow(*s, r.tables[i].outputs[k], st.nodes[i].outputs[k].type) == plain.trace[i].outputs[k]);
      }
    }
  }
}

TEST_CASE("outputs equal the plaintext evaluator on three graphs") {
  for (const auto* src : {&samples::worked_graph(), &samples::chain_graph(), &samples::diamond_graph()}) {
    const auto s = src == &samples::worked_graph() ? testing::worked_setup() : testing::encrypt_graph(*src);
    Developer dev(s);
    LocalLink link(dev);
    link.open("outputs");
    Verifier v(s->params, *src, {}, testing::small_config(Mode::Honest, 4));
    const vga::Domain d = vga::input_domain(s->graph.inputs, s->graph.payload_bits());
    Rng rng(4);
    for (int n = 0; n < 20; ++n) {
      const auto x = d.sample(rng);
      CHECK(v.eval_encrypted(link, x).y == table::evaluate_plain(s->transformed, x).outputs);
    }
  }
}

TEST_CASE("malicious strategies are caught in general mode") {
  const auto s = testing::worked_setup();
  for (Strategy st : {Strategy::FlipPayload, Strategy::FlipTag, Strategy::SwapAnswers, Strategy::ReplayForeign}) {
    const auto r = testing::run_session(s, spec(), testing::worked_cp(), testing::small_config(Mode::General, 6), st);
    CHECK_MESSAGE(!r.accept, to_string(st));
    CHECK_FALSE(r.certificate.failures.empty());
    CHECK(strategy_from_string(to_string(st)) == st);
  }
  CHECK_THROWS_AS(strategy_from_string("lazy"), FormatError);
}

TEST_CASE("a mutated implementation is rejected") {
  const auto s = testing::encrypt_graph(samples::worked_graph_mutated());
  auto cfg = testing::small_config(Mode::General, 7, 64);
  cfg.extra_inputs = {{{"a", 46}, {"b", 1}}};
  const auto r = testing::run_session(s, spec(), testing::worked_cp(), cfg);
  CHECK_FALSE(r.accept);
  bool some_wrong = false;
  for (const auto& res : r.certificate.results) some_wrong = some_wrong || !res.ok;
  CHECK(some_wrong);
  // The run itself was honest, so the audit confirms the verdict.
  CHECK(audit::audit_certificate(r.certificate).ok);
}

TEST_CASE("developer refuses malformed queries") {
  const auto s = testing::worked_setup();
  Developer dev(s);
  dev.reset();
  EncodeQuery q{QueryKind::Q1, 0, 0, table::TaggedValue::bottom().to_bits(16), {}, {}};
  CHECK(dev.encode(q).null);  // bottom is never an external input
  q.word = table::TaggedValue::of(46).to_bits(16);
  q.table = 99;
  CHECK(dev.encode(q).null);
  q.table = 0;
  const EncodeAnswer a = dev.encode(q);
  CHECK_FALSE(a.null);
  CHECK(he::dec_word(*s->keys.sk, a.word) == q.word);
  // q2 on words never issued by the developer.
  Rng rng(8);
  EncodeQuery q2;
  q2.kind = QueryKind::Q2;
  q2.table = 0;
  q2.inputs = {he::enc_word(*s->keys.pk, q.word, rng)};
  q2.outputs = {he::enc_word(*s->keys.pk, rng.bits(16), rng)};
  CHECK(dev.encode(q2).null);
  // Checker with no matching answer word.
  CheckerQuery c;
  c.p = q2.inputs[0];
  CHECK_FALSE(dev.checker(c).has_value());
  CHECK_FALSE(dev.proof(s->params.programs[0]).has_value());
}

TEST_CASE("path queries") {
  const auto s = testing::worked_setup();
  Developer dev(s);
  dev.reset();
  // Independent oracle: which paths some point of the input domain realizes.
  const vga::Domain d = vga::input_domain(s->graph.inputs, s->graph.payload_bits());
  std::vector<table::PlainResult> traces;
  for (std::uint64_t k = 0; k < d.size(); ++k) traces.push_back(table::evaluate_plain(s->transformed, d.at(k)));
  const auto paths = vga::enumerate_paths(s->params.structure, 100);
  std::size_t feasible = 0;
  for (const auto& p : paths) {
    bool realizable = false;
    for (const auto& t : traces) {
      bool all = true;
      for (std::size_t i : p) all = all && t.trace[i].evaluated && t.trace[i].outputs[0].top;
      realizable = realizable || all;
    }
    const auto x = dev.path({p});
    CHECK(x.has_value() == realizable);
    feasible += realizable;
    if (!x) continue;
    const auto covered = table::evaluate_plain(s->transformed, *x);
    for (std::size_t t : p) CHECK(covered.trace[t].outputs[0].top);
  }
  CHECK(feasible > 0);
  CHECK(feasible < paths.size());  // F4's constant never reaches z > 30
  CHECK_FALSE(dev.path({{0, 1}}).has_value());
  CHECK_FALSE(dev.path({{}}).has_value());
}

TEST_CASE("loopback and tcp transports") {
  const auto s = testing::worked_setup();
  const auto cfg = testing::small_config(Mode::General, 9);
  const auto local = testing::run_session(s, spec(), testing::worked_cp(), cfg);

  auto [vt, dt] = loopback_pair();
  Developer dev(s, Strategy::Honest, cfg.coins);
  std::thread server([&dev, t = dt.get()] { serve(dev, *t); });
  RemoteLink link(*vt);
  const PublicParams pp = link.fetch_params(cfg.session);
  CHECK(pp.digest() == s->params.digest());
  const auto remote = verify_session(pp, spec(), testing::worked_cp(), cfg, link);
  server.join();
  CHECK(remote.accept);
  // Same coins and developer seed: the transcripts agree byte for byte.
  CHECK(audit::to_json(remote.certificate) == audit::to_json(local.certificate));

  TcpListener listener("127.0.0.1", 0);
  REQUIRE(listener.port() > 0);
  std::thread tcp_server([&] {
    auto t = listener.accept();
    Developer d2(s, Strategy::Honest, cfg.coins);
    serve(d2, *t);
  });
  auto t = tcp_connect("127.0.0.1", listener.port());
  RemoteLink tl(*t);
  const PublicParams tpp = tl.fetch_params(cfg.session);
  const auto tcp = verify_session(tpp, spec(), testing::worked_cp(), cfg, tl);
  tcp_server.join();
  CHECK(tcp.accept);
  CHECK(audit::to_json(tcp.certificate) == audit::to_json(local.certificate));
}

TEST_CASE("closed channel aborts the session") {
  auto [vt, dt] = loopback_pair();
  dt->close();
  RemoteLink link(*vt);
  CHECK_THROWS_AS(link.fetch_params("s"), ChannelError);
  CHECK_THROWS_AS(tcp_connect("127.0.0.1", 1), ChannelError);
}

TEST_CASE("integer-she cannot host the universal circuit") {
  EncryptConfig cfg;
  cfg.backend.kind = he::BackendKind::IntegerShe;
  Rng rng(10);
  try {
    vs_encrypt(16, table::parse_graph(samples::worked_graph()), cfg, rng);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("multiplicative depth") != std::string::npos);
  }
}

TEST_CASE("evaluation cache is transparent") {
  const auto s = testing::worked_setup();
  auto cache = std::make_shared<EvalCache>();
  const auto cfg = testing::small_config(Mode::General, 11);
  const auto a = testing::run_session(s, spec(), testing::worked_cp(), cfg, Strategy::Honest, cache);
  const auto b = testing::run_session(s, spec(), testing::worked_cp(), cfg, Strategy::Honest, cache);
  const auto c = testing::run_session(s, spec(), testing::worked_cp(), cfg);
  CHECK(audit::to_json(a.certificate) == audit::to_json(b.certificate));
  CHECK(audit::to_json(a.certificate) == audit::to_json(c.certificate));
}

TEST_CASE("different coins give different transcripts") {
  const auto s = testing::worked_setup();
  const auto a = testing::run_session(s, spec(), {}, testing::small_config(Mode::General, 12));
  const auto b = testing::run_session(s, spec(), {}, testing::small_config(Mode::General, 13));
  CHECK(a.accept);
  CHECK(b.accept);
  CHECK(a.certificate.ct_sk != b.certificate.ct_sk);
  CHECK(a.certificate.sk != b.certificate.sk);
}

TEST_CASE("coverage from a certificate") {
  const auto s = testing::worked_setup();
  auto cfg = testing::small_config(Mode::General, 14, 64);
  cfg.suite.id = vga::kDevPathId;
  const auto r = testing::run_session(s, spec(), {}, cfg);
  const auto cov = coverage_report(r.certificate);
  // Developer-chosen path inputs reach every row.
  CHECK(cov.covered().size() == s->params.table_count());
}
