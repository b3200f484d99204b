#include "tabverify/sim.hpp"

namespace tabverify::sim {

using table::ExprOp;
using table::ExprPtr;
using table::ValueType;

namespace {

struct ExprFactory {
  Rng& rng;
  const std::vector<std::pair<std::string, ValueType>>& vars;
  int h;

  ExprPtr constant(ValueType t) {
    if (t == ValueType::Bool) return table::make_const(rng.bit(), t);
    const std::int64_t span = std::min<std::int64_t>(40, (std::int64_t{1} << (h - 1)) - 1);
    return table::make_const(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * span + 1))) - span, t);
  }

  ExprPtr leaf(ValueType t) {
    std::vector<std::size_t> match;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].second == t) match.push_back(i);
    if (match.empty() || rng.below(3) == 0) return constant(t);
    const auto& v = vars[match[rng.below(match.size())]];
    return table::make_input(v.first, t);
  }

  ExprPtr make(ValueType t, int depth) {
    if (depth <= 0) return leaf(t);
    if (t == ValueType::Int) {
      const ExprOp op = rng.bit() ? ExprOp::Add : ExprOp::Sub;
      return table::make_op(op, {make(ValueType::Int, depth - 1), make(ValueType::Int, depth - 1)});
    }
    switch (rng.below(3)) {
      case 0: return table::make_op(ExprOp::Lt, {make(ValueType::Int, depth - 1), make(ValueType::Int, depth - 1)});
      case 1: return table::make_op(ExprOp::And, {make(ValueType::Bool, depth - 1), make(ValueType::Bool, depth - 1)});
      default: return leaf(ValueType::Bool);
    }
  }
};

std::string label_of(std::size_t i) { return vga::table_label(i); }

bool chance(Rng& rng, double p) { return static_cast<double>(rng.below(1u << 20)) < p * (1u << 20); }

}  // namespace

SimSetup s1_simulate(int K, const table::StructureGraph& structure, const circuit::UniversalBudget& budget, int depth_hint,
                     const protocol::EncryptConfig& cfg, Rng& rng) {
  SimSetup out;
  out.fake.structure = structure;
  const int h = structure.width / 2;
  const int depth = std::clamp(depth_hint, 0, 3);
  std::vector<circuit::Circuit> circuits;
  for (std::size_t i = 0; i < structure.nodes.size(); ++i) {
    const auto& node = structure.nodes[i];
    std::vector<std::pair<std::string, ValueType>> vars;
    std::vector<ValueType> in;
    std::vector<ValueType> outs;
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      vars.emplace_back("w" + std::to_string(k), node.inputs[k].type);
      in.push_back(node.inputs[k].type);
    }
    for (const auto& o : node.outputs) outs.push_back(o.type);

    table::RowTable t;
    t.label = label_of(i);
    t.origin = "fake";
    for (const auto& v : vars) t.input_names.push_back(v.first);
    circuit::Circuit c;
    for (int attempt = 0;; ++attempt) {
      ExprFactory f{rng, vars, h};
      const int d = attempt < 4 ? depth : 0;
      t.row.predicate = attempt < 8 ? f.make(ValueType::Bool, d) : table::make_const(1, ValueType::Bool);
      t.row.functions.clear();
      for (ValueType ot : outs) t.row.functions.push_back(attempt < 8 ? f.make(ot, d) : f.constant(ot));
      c = circuit::compile(t, in, outs, structure.width);
      if (c.gates.size() <= budget.slots && c.inputs <= budget.input_bits && c.outputs.size() <= budget.output_bits) break;
      if (attempt >= 8) throw BudgetError("s1: budget too small for any fake table");
    }
    out.fake.tables.push_back(std::move(t));
    circuits.push_back(std::move(c));
  }

  out.keys = he::keygen(cfg.backend, K, rng);
  auto& pp = out.params;
  pp.K = K;
  pp.structure = structure;
  pp.hpk = out.keys.pk;
  pp.budget = budget;
  pp.cipher_rounds = cfg.cipher_rounds;
  pp.code = commitment::gen_code(cfg.code_message_bits, cfg.code_epsilon, static_cast<std::size_t>(K), cfg.code_seed);
  pp.prepare();
  for (const auto& c : circuits) pp.programs.push_back(he::enc_word(*pp.hpk, circuit::encode_program(c, budget), rng));
  return out;
}

nlohmann::json public_metadata(const protocol::PublicParams& pp) {
  std::vector<std::size_t> lengths;
  for (const auto& w : pp.programs) lengths.push_back(w.size());
  return {{"K", pp.K},
          {"structure", pp.structure.to_json()},
          {"budget", pp.budget.to_json()},
          {"program_lengths", lengths},
          {"ciphertext_bytes", pp.ct_bytes()},
          {"backend", he::to_string(pp.hpk->kind())},
          {"cipher_rounds", pp.cipher_rounds},
          {"code", pp.code.to_json()},
          {"universal_digest", pp.universal->circuit.digest()}};
}

OracleState::OracleState(const protocol::PublicParams& pp, const table::TableGraph& real, std::uint64_t rng_seed,
                         std::shared_ptr<protocol::EvalCache> cache)
    : pp_(pp), real_(real), transformed_(table::transform(real)), rng_(rng_seed), evaluator_(pp, std::move(cache)) {
  if (!(transformed_.structure == pp.structure)) throw Error("oracle: graph structure differs from the parameters");
}

bool OracleState::valid(const he::CtWord& w, std::size_t bits) const {
  if (w.size() != bits) return false;
  try {
    for (const auto& c : w) pp_.hpk->check(c);
  } catch (const FormatError&) {
    return false;
  }
  return true;
}

protocol::EncodeAnswer OracleState::oracle_o1(const protocol::EncodeQuery& q) {
  using protocol::EncodeAnswer;
  const auto& s = pp_.structure;
  const int m = s.width;
  if (q.table >= s.nodes.size()) return EncodeAnswer::null_answer();
  const auto& node = s.nodes[q.table];

  if (q.kind == protocol::QueryKind::Q1) {
    if (q.slot >= node.inputs.size() || !node.inputs[q.slot].external) return EncodeAnswer::null_answer();
    if (q.word.size() != static_cast<std::size_t>(m)) return EncodeAnswer::null_answer();
    table::TaggedValue e;
    try {
      e = table::TaggedValue::from_bits(q.word, node.inputs[q.slot].type);
    } catch (const FormatError&) {
      return EncodeAnswer::null_answer();
    }
    if (!e.top) return EncodeAnswer::null_answer();
    EncodeAnswer a;
    a.word = he::enc_word(*pp_.hpk, q.word, rng_);
    m_.push_back({true, q.table, q.slot, {a.word}, {}, {e}, {}});
    return a;
  }

  if (q.inputs.size() != node.inputs.size() || q.outputs.size() != node.outputs.size()) return EncodeAnswer::null_answer();
  for (const auto& w : q.inputs)
    if (!valid(w, static_cast<std::size_t>(m))) return EncodeAnswer::null_answer();
  for (const auto& w : q.outputs)
    if (!valid(w, static_cast<std::size_t>(m))) return EncodeAnswer::null_answer();

  // Plaintext behind every input word, looked up in M.
  std::vector<table::TaggedValue> e;
  for (std::size_t k = 0; k < node.inputs.size(); ++k) {
    const auto& slot = node.inputs[k];
    std::optional<table::TaggedValue> found;
    for (const auto& r : m_) {
      if (found) break;
      if (slot.external && r.q1 && r.table == q.table && r.slot == k && r.u[0] == q.inputs[k]) found = r.e[0];
      if (!slot.external && !r.q1 && s.nodes[r.table].group == slot.group && slot.port < r.v.size() &&
          r.v[slot.port] == q.inputs[k])
        found = r.t[slot.port];
    }
    if (!found) return EncodeAnswer::null_answer();
    e.push_back(*found);
  }
  if (evaluator_.evaluate(q.table, q.inputs) != q.outputs) return EncodeAnswer::null_answer();

  const auto t = table::apply_row(transformed_.tables[q.table], e, m / 2);
  m_.push_back({false, q.table, 0, q.inputs, q.outputs, e, t});
  EncodeAnswer a;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!t[j].top) a.ports.push_back({protocol::PortKind::Bottom, {}});
    else if (node.outputs[j].external_name)
      a.ports.push_back({protocol::PortKind::Payload, protocol::take_slice(t[j].to_bits(m), protocol::Slice::Payload)});
    else a.ports.push_back({protocol::PortKind::Top, {}});
  }
  return a;
}

protocol::PathAnswer OracleState::oracle_o2(const protocol::PathQuery& q) {
  return protocol::find_path_input(real_, transformed_, q.tables);
}

protocol::CommitAnswer OracleState::oracle_o3(const protocol::CheckerQuery& q) {
  pending_.reset();
  const std::size_t m = static_cast<std::size_t>(pp_.width());
  if (q.table >= pp_.table_count() || !valid(q.p, m)) return std::nullopt;
  const auto& node = pp_.structure.nodes[q.table];
  std::optional<BitVec> a;
  if (q.target == protocol::Target::Input) {
    if (q.index >= node.inputs.size()) return std::nullopt;
    for (const auto& r : m_)
      if (!a && r.q1 && r.table == q.table && r.slot == q.index && r.u[0] == q.p) a = r.e[0].to_bits(pp_.width());
  } else {
    if (q.index >= node.outputs.size()) return std::nullopt;
    for (const auto& r : m_)
      if (!a && !r.q1 && r.table == q.table && r.v[q.index] == q.p) a = r.t[q.index].to_bits(pp_.width());
  }
  if (!a) return std::nullopt;

  const auto slice = protocol::slice_for(pp_.structure, q.table, q.target, q.index);
  const BitVec plain = protocol::take_slice(*a, slice);
  if (!valid(q.y, plain.size())) return std::nullopt;
  const std::size_t blocks = commitment::block_count(plain.size(), pp_.code);
  if (q.challenges.size() != blocks) return std::nullopt;

  // The oracle knows sk: d comes from the real answer, not from decrypting y.
  const BitVec d = symcrypto::se_enc(pp_.cipher_spec(plain.size()), sk_, plain);
  const std::size_t mc = pp_.code.message_bits;
  Pending p{q, slice, {}};
  std::vector<commitment::CommitMessage> out;
  try {
    for (std::size_t b = 0; b < blocks; ++b) {
      BitVec block(mc, 0);
      for (std::size_t i = 0; i < mc && b * mc + i < d.size(); ++i) block[i] = d[b * mc + i];
      p.committers.emplace_back(pp_.code);
      out.push_back(p.committers.back().commit(block, q.challenges[b], rng_));
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  pending_ = std::move(p);
  return out;
}

protocol::RevealAnswer OracleState::oracle_o3_open(const he::CtWord& ct_sk) {
  if (!pending_) return std::nullopt;
  Pending p = std::move(*pending_);
  pending_.reset();
  if (!valid(ct_sk, static_cast<std::size_t>(pp_.K))) return std::nullopt;
  he::CtWord x = ct_sk;
  const he::CtWord sp = protocol::take_slice(p.query.p, p.slice);
  x.insert(x.end(), sp.begin(), sp.end());
  if (pp_.hpk->eval_all(pp_.cipher_circuit(sp.size()), x) != p.query.y) return std::nullopt;
  std::vector<commitment::RevealMessage> out;
  for (const auto& c : p.committers) out.push_back(c.reveal());
  return out;
}

symcrypto::SeKey script_key(const ScriptConfig& cfg, int K) {
  Rng rng(mix64(cfg.seed ^ 0x6b6579));
  return symcrypto::se_keygen(static_cast<std::size_t>(K), rng);
}

namespace {

class Script {
 public:
  Script(const ScriptConfig& cfg, const protocol::PublicParams& pp, protocol::DeveloperLink& dev,
         std::shared_ptr<protocol::EvalCache> cache)
      : cfg_(cfg), pp_(pp), dev_(dev), rng_(cfg.seed), evaluator_(pp, std::move(cache)), sk_(script_key(cfg, pp.K)) {
    ct_sk_ = he::enc_word(*pp_.hpk, sk_.bits, rng_);
  }

  Transcript run() {
    const auto& s = pp_.structure;
    const int m = s.width;
    const int h = m / 2;
    const vga::Domain dom = vga::input_domain(s.inputs, h);
    const table::Assignment x = dom.sample(rng_);

    if (chance(rng_, cfg_.path_rate)) {
      protocol::PathQuery pq;
      const auto paths = vga::enumerate_paths(s, 64);
      if (!paths.empty() && rng_.below(4) != 0) pq.tables = paths[rng_.below(paths.size())];
      else for (std::size_t k = 0, n = 1 + rng_.below(3); k < n; ++k) pq.tables.push_back(rng_.below(s.nodes.size()));
      const auto a = dev_.path(pq);
      log("path", pq.to_json(), protocol::path_answer_to_json(a, s.inputs), a ? "path" : "path-null",
          protocol::path_answer_to_json(a, s.inputs).dump());
    }

    struct Run {
      bool done = false;
      std::vector<he::CtWord> outputs;
      protocol::EncodeAnswer answer;
    };
    std::vector<Run> runs(s.nodes.size());
    for (std::size_t i : table::consistent_order(s)) {
      const auto& node = s.nodes[i];
      std::vector<he::CtWord> inputs;
      bool ok = true;
      for (std::size_t k = 0; ok && k < node.inputs.size(); ++k) {
        const auto& slot = node.inputs[k];
        if (slot.external) {
          protocol::EncodeQuery q;
          q.kind = protocol::QueryKind::Q1;
          q.table = i;
          q.slot = k;
          if (chance(rng_, cfg_.invalid_rate)) {
            q.word = BitVec(static_cast<std::size_t>(m), 0);  // bottom tag
            if (rng_.bit()) q.word.pop_back();
            encode(q);
          }
          q.word = table::encode_external(*x.at(slot.external_name), slot.type, h).to_bits(m);
          const auto a = encode(q);
          if (a.null) {
            ok = false;
            break;
          }
          if (chance(rng_, cfg_.checker_rate)) checker(i, protocol::Target::Input, k, a.word);
          inputs.push_back(a.word);
        } else {
          std::optional<std::size_t> from;
          for (std::size_t sib : s.groups[slot.group]) {
            if (!runs[sib].done || runs[sib].answer.null) {
              ok = false;
              break;
            }
            if (runs[sib].answer.ports[slot.port].kind != protocol::PortKind::Bottom) from = sib;
          }
          if (!ok || !from) {
            ok = false;
            break;
          }
          inputs.push_back(runs[*from].outputs[slot.port]);
        }
      }
      if (!ok) continue;

      const auto outputs = evaluator_.evaluate(i, inputs);
      protocol::EncodeQuery q;
      q.kind = protocol::QueryKind::Q2;
      q.table = i;
      if (chance(rng_, cfg_.invalid_rate)) {
        // Unknown intermediate: a fresh encryption the developer never produced.
        q.inputs = inputs;
        q.inputs[0] = he::enc_word(*pp_.hpk, table::TaggedValue::of(0).to_bits(m), rng_);
        q.outputs = evaluator_.evaluate(i, q.inputs);
        encode(q);
      }
      q.inputs = inputs;
      q.outputs = outputs;
      runs[i].answer = encode(q);
      runs[i].outputs = outputs;
      runs[i].done = true;
      if (runs[i].answer.null) continue;
      for (std::size_t j = 0; j < outputs.size(); ++j)
        if (chance(rng_, cfg_.checker_rate)) checker(i, protocol::Target::Output, j, outputs[j]);
      if (chance(rng_, cfg_.invalid_rate)) {
        if (rng_.bit()) checker(i, protocol::Target::Output, 0, he::enc_word(*pp_.hpk, rng_.bits(static_cast<std::size_t>(m)), rng_));
        else checker(i, protocol::Target::Output, 0, outputs[0], true);
      }
    }
    return std::move(tr_);
  }

 private:
  void log(const char* kind, const nlohmann::json& q, const nlohmann::json& a, const std::string& branch,
           const std::string& observable) {
    tr_.entries.push_back(std::string(kind) + " " + q.dump() + " => " + a.dump());
    tr_.observable.push_back(std::string(kind) + " " + observable);
    tr_.branches[branch]++;
  }

  protocol::EncodeAnswer encode(const protocol::EncodeQuery& q) {
    const auto a = dev_.encode(q);
    const bool q1 = q.kind == protocol::QueryKind::Q1;
    std::string branch = q1 ? "q1" : "q2";
    std::string obs;
    if (a.null) {
      branch += "-null";
      obs = "null";
    } else if (q1) {
      obs = "ct[" + std::to_string(a.word.size()) + "]";
    } else {
      bool top = false;
      for (const auto& p : a.ports) top = top || p.kind != protocol::PortKind::Bottom;
      branch += top ? "-top" : "-bottom";
      obs = a.to_json().dump();
    }
    log("encode", q.to_json(), a.to_json(), branch, obs);
    return a;
  }

  void checker(std::size_t table, protocol::Target target, std::size_t index, const he::CtWord& p, bool short_challenge = false) {
    const auto slice = protocol::slice_for(pp_.structure, table, target, index);
    const he::CtWord sp = protocol::take_slice(p, slice);
    he::CtWord x = ct_sk_;
    x.insert(x.end(), sp.begin(), sp.end());
    protocol::CheckerQuery q{table, target, index, p, pp_.hpk->eval_all(pp_.cipher_circuit(sp.size()), x), {}};
    const std::size_t blocks = commitment::block_count(sp.size(), pp_.code) - (short_challenge ? 1 : 0);
    for (std::size_t b = 0; b < blocks; ++b) q.challenges.push_back(commitment::choose_challenge(pp_.code.length, rng_));
    const auto c = dev_.checker(q);
    log("checker", q.to_json(), protocol::commit_answer_to_json(c), c ? "commit" : "commit-null", c ? "commit" : "null");
    if (!c) return;
    he::CtWord key = ct_sk_;
    // Occasionally a key that does not match y: the round must not open.
    if (chance(rng_, cfg_.invalid_rate / 2)) key = he::enc_word(*pp_.hpk, rng_.bits(key.size()), rng_);
    const auto r = dev_.proof(key);
    std::string data = "null";
    if (r) {
      data.clear();
      for (const auto& b : *r) data += bits_to_string(b.data);
    }
    log("proof", {{"ct_sk", protocol::word_to_base64(key)}}, protocol::reveal_answer_to_json(r), r ? "reveal" : "reveal-null", data);
  }

  const ScriptConfig& cfg_;
  const protocol::PublicParams& pp_;
  protocol::DeveloperLink& dev_;
  Rng rng_;
  protocol::TableEvaluator evaluator_;
  symcrypto::SeKey sk_;
  he::CtWord ct_sk_;
  Transcript tr_;
};

}  // namespace

Transcript run_script(const ScriptConfig& cfg, const protocol::PublicParams& pp, protocol::DeveloperLink& dev,
                      std::shared_ptr<protocol::EvalCache> cache) {
  return Script(cfg, pp, dev, std::move(cache)).run();
}

Experiment run_experiment(World w, const table::TableGraph& g, const ScriptConfig& script, int K,
                          const protocol::EncryptConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Experiment e;
  if (w == World::Real) {
    auto setup = protocol::vs_encrypt(K, g, cfg, rng);
    protocol::Developer dev(setup, protocol::Strategy::Honest, seed);
    protocol::LocalLink link(dev);
    e.metadata = public_metadata(setup->params);
    e.transcript = run_script(script, setup->params, link);
    return e;
  }
  // The simulator sees only public facts about G: its structure and the program budget.
  const auto tg = table::transform(g);
  std::vector<circuit::Circuit> circuits;
  for (std::size_t i = 0; i < tg.size(); ++i) circuits.push_back(circuit::compile(tg, i));
  const SimSetup sim = s1_simulate(K, tg.structure, circuit::fit_budget(circuits), 2, cfg, rng);
  OracleState o(sim.params, g, protocol::session_seed(seed, 0));
  o.set_verifier_key(script_key(script, K));
  e.metadata = public_metadata(sim.params);
  e.transcript = run_script(script, sim.params, o);
  return e;
}

EquivalenceReport check_equivalence(std::shared_ptr<const protocol::DeveloperSetup> setup, std::size_t sequences,
                                    std::uint64_t seed, std::shared_ptr<protocol::EvalCache> cache) {
  if (!cache) cache = std::make_shared<protocol::EvalCache>();
  EquivalenceReport rep;
  const auto& pp = setup->params;
  for (std::size_t k = 0; k < sequences; ++k) {
    ScriptConfig sc;
    sc.seed = mix64(seed + k);
    protocol::Developer dev(setup, protocol::Strategy::Honest, sc.seed, cache);
    protocol::LocalLink link(dev);
    const Transcript real = run_script(sc, pp, link, cache);
    OracleState o(pp, setup->graph, protocol::session_seed(sc.seed, 0), cache);
    o.set_verifier_key(script_key(sc, pp.K));
    const Transcript ideal = run_script(sc, pp, o, cache);

    ++rep.sequences;
    rep.answers += real.entries.size();
    for (const auto& [b, n] : real.branches) rep.branches[b] += n;
    if (real.entries == ideal.entries) {
      ++rep.identical;
    } else if (rep.first_difference.empty()) {
      std::size_t i = 0;
      while (i < real.entries.size() && i < ideal.entries.size() && real.entries[i] == ideal.entries[i]) ++i;
      rep.first_difference = "sequence " + std::to_string(k) + ", entry " + std::to_string(i) + ": " +
                             (i < real.entries.size() ? real.entries[i].substr(0, 160) : std::string("<end>"));
    }
  }
  return rep;
}

double metadata_advantage(const table::TableGraph& g, std::size_t pairs, int K, const protocol::EncryptConfig& cfg,
                          std::uint64_t seed) {
  const auto tg = table::transform(g);
  std::vector<circuit::Circuit> circuits;
  for (std::size_t i = 0; i < tg.size(); ++i) circuits.push_back(circuit::compile(tg, i));
  const auto budget = circuit::fit_budget(circuits);
  // D outputs the low bit of a hash over the metadata.
  auto d = [](const nlohmann::json& meta) { return (std::stoi(sha256_hex(meta.dump()).substr(63), nullptr, 16) & 1) != 0; };
  std::size_t real_ones = 0;
  std::size_t ideal_ones = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    Rng r1(mix64(seed + 2 * k));
    real_ones += d(public_metadata(protocol::vs_encrypt(K, g, cfg, r1)->params));
    Rng r2(mix64(seed + 2 * k + 1));
    ideal_ones += d(public_metadata(s1_simulate(K, tg.structure, budget, 2, cfg, r2).params));
  }
  return std::abs(static_cast<double>(real_ones) - static_cast<double>(ideal_ones)) / static_cast<double>(pairs);
}

}  // namespace tabverify::sim
