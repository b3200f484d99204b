// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "session_support.hpp"
#include "tabverify/audit.hpp"
#include "tabverify/demo.hpp"
#include "tabverify/sim.hpp"
#include "test_support.hpp"

using namespace tabverify;

namespace {

// Pinned thresholds.
constexpr int kHeCircuits = 1000;
constexpr double kHeSeconds = 120;
constexpr int kUniversalCircuits = 500;
constexpr int kUniversalInputsPerCircuit = 4;
constexpr std::size_t kExhaustiveMaxInputs = 10;
constexpr int kExhaustivePerWidth = 3;
constexpr int kShadowSessions = 100;
constexpr int kOutputInputs = 500;
constexpr int kMutations = 1000;
constexpr double kAuditSeconds = 60;
constexpr int kStrategySessions = 100;
constexpr int kStrategyMinCaught = 99;
constexpr int kBindingTrials = 1000;
constexpr int kBindingSeedSearch = 64;
constexpr double kBindingMaxRate = 1.0 / 1024;
constexpr std::size_t kEquivalenceSequences = 1000;
constexpr double kDemoSeconds = 300;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Integer-SHE evaluation of random in-budget circuits decrypts to simulation.
Outcome he_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const auto kp = he::keygen({he::BackendKind::IntegerShe}, 16, rng);
  int evaluated = 0, failures = 0, skipped = 0;
  while (evaluated < kHeCircuits) {
    const auto c = testing::random_circuit(rng, 2 + rng.below(7), 4 + rng.below(90), 1 + rng.below(4));
    const BitVec x = rng.bits(c.inputs);
    const he::CtWord in = he::enc_word(*kp.pk, x, rng);
    if (!kp.pk->budget(c, in).ok) {
      ++skipped;
      continue;
    }
    failures += he::dec_word(*kp.sk, kp.pk->eval_all(c, in)) != circuit::simulate(c, x);
    ++evaluated;
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << evaluated << " circuits (depth budget " << kp.pk->depth_budget() << ", " << skipped
    << " over-budget draws skipped), " << failures << " failures, " << s << " s";
  return {failures == 0 && s < kHeSeconds, d.str()};
}

// 2. U(S_C, x) = C(x) in the worked example's budget.
Outcome universality() {
  const auto s = testing::worked_setup();
  const auto& budget = s->params.budget;
  const auto u = circuit::build_universal(budget, false);
  Rng rng(102);
  auto run_u = [&](const BitVec& prog, const BitVec& x) {
    BitVec in = prog;
    in.insert(in.end(), x.begin(), x.end());
    in.resize(prog.size() + budget.input_bits, 0);
    return circuit::simulate(u.circuit, in);
  };
  auto matches = [&](const circuit::Circuit& c, const BitVec& prog, const BitVec& x) {
    const BitVec got = run_u(prog, x);
    const BitVec want = circuit::simulate(c, x);
    return std::equal(want.begin(), want.end(), got.begin());
  };
  int mismatches = 0;
  for (int n = 0; n < kUniversalCircuits; ++n) {
    const auto c = testing::random_circuit(rng, 1 + rng.below(budget.input_bits), 1 + rng.below(budget.slots),
                                           1 + rng.below(budget.output_bits));
    const BitVec prog = circuit::encode_program(c, budget);
    for (int k = 0; k < kUniversalInputsPerCircuit; ++k) mismatches += !matches(c, prog, rng.bits(c.inputs));
  }
  std::size_t exhaustive_points = 0;
  for (std::size_t n = 1; n <= kExhaustiveMaxInputs; ++n) {
    for (int k = 0; k < kExhaustivePerWidth; ++k) {
      const auto c = testing::random_circuit(rng, n, 1 + rng.below(budget.slots), 1 + rng.below(budget.output_bits));
      const BitVec prog = circuit::encode_program(c, budget);
      for (std::uint64_t v = 0; v < (1ULL << n); ++v, ++exhaustive_points)
        mismatches += !matches(c, prog, uint_to_bits(v, n));
    }
  }
  std::ostringstream d;
  d << kUniversalCircuits << " random circuits x " << kUniversalInputsPerCircuit << " inputs and "
    << exhaustive_points << " exhaustive points (1.." << kExhaustiveMaxInputs << "-bit inputs), budget "
    << budget.to_json().dump() << ", " << mismatches << " mismatches";
  return {mismatches == 0, d.str()};
}

// 3. Every encrypted word of random worked-example sessions decrypts to the plaintext trace.
Outcome shadow() {
  const auto s = testing::worked_setup();
  const auto& st = s->params.structure;
  std::size_t words = 0, mismatches = 0, rejected = 0;
  for (int n = 0; n < kShadowSessions; ++n) {
    auto cfg = testing::small_config(protocol::Mode::General, 1000 + n, 2);
    const vga::Domain d = vga::input_domain(s->graph.inputs, s->graph.payload_bits());
    Rng rng(3000 + n);
    cfg.extra_inputs = {d.sample(rng)};
    const auto r = testing::run_session(s, samples::worked_spec(), {}, cfg);
    rejected += !r.accept;
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
      const auto plain = table::evaluate_plain(s->transformed, r.certificate.results[k].x);
      for (std::size_t i = 0; i < r.runs[k].tables.size(); ++i) {
        const auto& run = r.runs[k].tables[i];
        if (run.evaluated != plain.trace[i].evaluated) {
          ++mismatches;
          continue;
        }
        if (!run.evaluated) continue;
        auto check = [&](const he::CtWord& w, table::ValueType t, const table::TaggedValue& want) {
          ++words;
          try {
            mismatches += table::TaggedValue::from_bits(he::dec_word(*s->keys.sk, w), t) != want;
          } catch (const FormatError&) {
            ++mismatches;
          }
        };
        for (std::size_t p = 0; p < run.inputs.size(); ++p) check(run.inputs[p], st.nodes[i].inputs[p].type, plain.trace[i].inputs[p]);
        for (std::size_t p = 0; p < run.outputs.size(); ++p)
          check(run.outputs[p], st.nodes[i].outputs[p].type, plain.trace[i].outputs[p]);
      }
    }
  }
  std::ostringstream d;
  d << kShadowSessions << " sessions, " << words << " words decrypted, " << mismatches << " mismatches, " << rejected
    << " sessions rejected";
  return {mismatches == 0 && rejected == 0 && words > 0, d.str()};
}

// 4. Encrypted outputs equal the plaintext evaluator on three graphs.
Outcome outputs() {
  std::size_t total = 0, mismatches = 0;
  std::ostringstream d;
  for (const auto* src : {&samples::worked_graph(), &samples::chain_graph(), &samples::diamond_graph()}) {
    const auto s = src == &samples::worked_graph() ? testing::worked_setup() : testing::encrypt_graph(*src);
    protocol::Developer dev(s);
    protocol::LocalLink link(dev);
    link.open("outputs");
    protocol::Verifier v(s->params, *src, {}, testing::small_config(protocol::Mode::General, 104));
    const vga::Domain dom = vga::input_domain(s->graph.inputs, s->graph.payload_bits());
    Rng rng(104);
    std::size_t bad = 0;
    for (int n = 0; n < kOutputInputs; ++n) {
      const auto x = dom.sample(rng);
      bad += v.eval_encrypted(link, x).y != table::evaluate_plain(s->transformed, x).outputs;
    }
    total += kOutputInputs;
    mismatches += bad;
    d << s->graph.name << " " << bad << "/" << kOutputInputs << " mismatches; ";
  }
  d << total << " inputs in total";
  return {mismatches == 0, d.str()};
}

// 5. Honest certificates audit to 1, single-field mutations to 0.
Outcome audit_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = testing::worked_setup();
  auto cache = std::make_shared<protocol::EvalCache>();
  bool honest_ok = true;
  for (auto mode : {protocol::Mode::Honest, protocol::Mode::General}) {
    const auto r = testing::run_session(s, samples::worked_spec(), testing::worked_cp(),
                                        testing::small_config(mode, 105, 64), protocol::Strategy::Honest, cache);
    honest_ok = honest_ok && r.accept && audit::audit_text(audit::serialize(r.certificate), cache).ok;
  }
  auto cfg = testing::small_config(protocol::Mode::General, 106, 64);
  cfg.suite.id = vga::kDevPathId;
  const auto r = testing::run_session(s, samples::worked_spec(), testing::worked_cp(), cfg, protocol::Strategy::Honest, cache);
  const std::string text = audit::serialize(r.certificate);
  honest_ok = honest_ok && audit::audit_text(text, cache).ok;
  const auto f = audit::fuzz(text, kMutations, 107, cache);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "honest audits " << (honest_ok ? "1" : "0") << "; " << f.detected << "/" << f.trials << " mutations audit to 0; "
    << secs << " s";
  if (!f.undetected.empty()) d << "; first undetected " << f.undetected.front();
  return {honest_ok && f.detected == f.trials && f.trials == static_cast<std::size_t>(kMutations) && secs < kAuditSeconds,
          d.str()};
}

// 6. Malicious strategies are rejected by the verifier or the auditor.
Outcome strategies() {
  const auto s = testing::worked_setup();
  auto cache = std::make_shared<protocol::EvalCache>();
  bool pass = true;
  std::ostringstream d;
  for (auto st : {protocol::Strategy::FlipPayload, protocol::Strategy::FlipTag, protocol::Strategy::SwapAnswers,
                  protocol::Strategy::ReplayForeign}) {
    int caught = 0;
    for (int n = 0; n < kStrategySessions; ++n) {
      const auto r = testing::run_session(s, samples::worked_spec(), testing::worked_cp(),
                                          testing::small_config(protocol::Mode::General, 2000 + n), st, cache);
      caught += !r.accept || !audit::audit_certificate(r.certificate, cache).ok;
    }
    pass = pass && caught >= kStrategyMinCaught;
    d << protocol::to_string(st) << " " << caught << "/" << kStrategySessions << "; ";
  }
  d << "threshold " << kStrategyMinCaught;
  return {pass, d.str()};
}

// 7. A committer searching seeds cannot open a different message.
Outcome binding() {
  const auto code = commitment::default_code();
  Rng rng(108);
  int cheats = 0, honest = 0;
  for (int n = 0; n < kBindingTrials; ++n) {
    const BitVec r = commitment::choose_challenge(code.length, rng);
    const BitVec seed = rng.bits(16);
    const BitVec data = rng.bits(code.message_bits);
    const auto m = commitment::commit_respond(data, r, seed, code);
    honest += commitment::verify_reveal(m, {seed, data}, r, code);
    bool opened = false;
    for (std::uint64_t alt = 0; alt < (1ULL << code.message_bits); ++alt) {
      const BitVec d2 = uint_to_bits(alt, code.message_bits);
      if (d2 != data) opened = opened || commitment::verify_reveal(m, {seed, d2}, r, code);
    }
    for (int k = 0; k < kBindingSeedSearch && !opened; ++k) {
      BitVec d2 = rng.bits(code.message_bits);
      if (d2 == data) d2[0] ^= 1;
      opened = commitment::verify_reveal(m, {rng.bits(16), d2}, r, code);
    }
    cheats += opened;
  }
  const double rate = static_cast<double>(cheats) / kBindingTrials;
  std::ostringstream d;
  d << "re-openings accepted " << cheats << "/" << kBindingTrials << " (limit " << kBindingMaxRate << "), honest opens "
    << honest << "/" << kBindingTrials << ", code q=" << code.length << " m_c=" << code.message_bits;
  return {rate <= kBindingMaxRate && honest == kBindingTrials, d.str()};
}

// 8. Developer services and oracles answer byte for byte alike.
Outcome equivalence() {
  const auto r = sim::check_equivalence(testing::worked_setup(), kEquivalenceSequences, 109);
  std::ostringstream d;
  d << r.identical << "/" << r.sequences << " sequences identical, " << r.answers << " answers, " << r.branches.size()
    << " answer kinds";
  if (!r.ok()) d << "; " << r.first_difference;
  return {r.ok() && r.sequences == kEquivalenceSequences, d.str()};
}

// 9. Worked example end to end.
Outcome worked_demo() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = demo::run_demo(demo::worked_config());
  const double secs = seconds_since(t0);
  const auto spec = table::parse_graph(samples::worked_spec());
  // Ground truth for a=46, b=True from the row predicates: z = 46 - 20 = 26 <= 30, b selects 2.
  const table::Assignment truth{{"y1", 0}, {"y2", 2}};
  std::ostringstream d;
  d << "verdict " << (r.session.accept ? "accept" : "reject") << ", coverage "
    << (r.coverage_ok() ? "matches" : "differs from") << " the plaintext trace, audit " << r.audit.value()
    << ", truth " << table::to_string(r.truth, spec.outputs) << " covering "
    << nlohmann::json(demo::labels(r.input_truth)).dump() << " (reference claim (True,⊥,⊥,2,⊥) recorded), " << secs
    << " s";
  return {r.ok() && r.truth == truth && secs < kDemoSeconds, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 he-correctness", he_correctness}, {"2 universality", universality}, {"3 shadow-trace", shadow},
      {"4 io-equivalence", outputs},        {"5 audit", audit_criterion},     {"6 checker", strategies},
      {"7 binding", binding},               {"8 oracle-equivalence", equivalence}, {"9 demo", worked_demo}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%s] %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%s: %d/%zu criteria passed\n", failed == 0 ? "PASS" : "FAIL", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
