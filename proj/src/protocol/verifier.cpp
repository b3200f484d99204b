#include <map>

#include "tabverify/protocol.hpp"

namespace tabverify::protocol {

namespace {

void check_ports(const std::vector<table::ExternalPort>& a, const std::vector<table::ExternalPort>& b, const char* what) {
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].name == b[i].name && a[i].type == b[i].type;
  if (!same) throw Error(std::string("spec ") + what + " ports differ from the published structure");
}

// Plaintext word the verifier expects behind an output answer.
BitVec expected_word(const PortAnswer& p, int m) {
  if (p.kind == PortKind::Bottom) return BitVec(static_cast<std::size_t>(m), 0);
  BitVec w = table::top_tag_bits(m);
  if (p.kind == PortKind::Payload) w.insert(w.end(), p.payload.begin(), p.payload.end());
  else w.resize(static_cast<std::size_t>(m), 0);
  return w;
}

// (group, port) feeding an external output.
std::pair<std::size_t, std::size_t> external_source(const table::StructureGraph& s, const std::string& name) {
  for (const auto& node : s.nodes)
    for (std::size_t j = 0; j < node.outputs.size(); ++j)
      if (node.outputs[j].external_name == name) return {node.group, j};
  throw Error("no table feeds output '" + name + "'");
}

}  // namespace

Verifier::Verifier(const PublicParams& pp, std::string spec_source, std::vector<vga::CriticalPoint> cp, VerifierConfig cfg,
                   std::shared_ptr<EvalCache> cache)
    : pp_(pp),
      spec_source_(std::move(spec_source)),
      spec_(table::parse_graph(spec_source_)),
      cp_(std::move(cp)),
      cfg_(std::move(cfg)),
      evaluator_(pp, std::move(cache)),
      coins_(cfg_.coins) {
  check_ports(spec_.inputs, pp_.structure.inputs, "input");
  check_ports(spec_.outputs, pp_.structure.outputs, "output");
  if (spec_.width != pp_.width()) throw Error("spec word width differs from the published structure");
  sk_ = symcrypto::se_keygen(static_cast<std::size_t>(pp_.K), coins_);
  ct_sk_ = he::enc_word(*pp_.hpk, sk_.bits, coins_);

  cert_.mode = cfg_.mode;
  cert_.session = cfg_.session;
  cert_.params = pp_;
  cert_.spec = spec_source_;
  cert_.vga = cfg_.suite;
  cert_.extra_inputs = cfg_.extra_inputs;
  cert_.cp = cp_;
  cert_.coins = cfg_.coins;
  cert_.sk = sk_.bits;
  cert_.ct_sk = ct_sk_;
}

void Verifier::fail(const std::string& why) { cert_.failures.push_back(why); }

EncodeAnswer Verifier::ask(DeveloperLink& dev, const EncodeQuery& q, std::size_t* index) {
  audit::QaeRecord r;
  r.q = q;
  r.a = dev.encode(q);
  *index = cert_.qa_e.size();
  cert_.qa_e.push_back(r);
  return r.a;
}

void Verifier::check_answer(DeveloperLink& dev, std::size_t qae, std::size_t table, Target target, std::size_t index,
                            const he::CtWord& p, const BitVec& expected) {
  const std::string where = vga::table_label(table) + (target == Target::Input ? " input " : " output ") +
                            std::to_string(index);
  const Slice slice = slice_for(pp_.structure, table, target, index);
  const he::CtWord sp = take_slice(p, slice);
  he::CtWord x = ct_sk_;
  x.insert(x.end(), sp.begin(), sp.end());

  audit::QacRecord r;
  r.qae = qae;
  r.q = {table, target, index, p, pp_.hpk->eval_all(pp_.cipher_circuit(sp.size()), x), {}};
  const std::size_t blocks = commitment::block_count(sp.size(), pp_.code);
  for (std::size_t b = 0; b < blocks; ++b) r.q.challenges.push_back(commitment::choose_challenge(pp_.code.length, coins_));

  r.commits = dev.checker(r.q);
  if (!r.commits || r.commits->size() != blocks) {
    fail(where + ": developer refused the checker query");
    cert_.qa_c.push_back(std::move(r));
    return;
  }
  r.proof_sent = true;
  r.reveals = dev.proof(ct_sk_);
  const auto t = r.transcript(sp.size());
  BitVec d;
  bool opened = false;
  try {
    opened = t && t->verify(pp_.code, &d);
  } catch (const Error&) {
    opened = false;
  }
  if (!opened) fail(where + ": commitment did not open");
  else if (symcrypto::se_dec(pp_.cipher_spec(sp.size()), sk_, d) != take_slice(expected, slice))
    fail(where + ": encrypted word does not match the answer");
  cert_.qa_c.push_back(std::move(r));
}

EvalResult Verifier::eval_encrypted(DeveloperLink& dev, const table::Assignment& x) {
  const auto& s = pp_.structure;
  const int m = s.width;
  const int h = m / 2;
  const bool general = cfg_.mode == Mode::General;
  EvalResult res;
  res.tables.resize(s.nodes.size());
  auto& runs = res.tables;

  // Unique top (or payload) answer among the siblings of a group at one port.
  // nullopt: unreachable or all bottom; SIZE_MAX: ambiguous.
  auto producer = [&](std::size_t group, std::size_t port, std::optional<std::size_t>& out) -> bool {
    out.reset();
    for (std::size_t k : s.groups.at(group)) {
      const auto& r = runs[k];
      if (!r.evaluated || r.null) return false;
      if (r.answer.ports.at(port).kind == PortKind::Bottom) continue;
      if (out) {
        fail(vga::table_label(k) + ": more than one sibling answered top");
        return false;
      }
      out = k;
    }
    return true;
  };

  for (std::size_t i : table::consistent_order(s)) {
    const auto& node = s.nodes[i];
    std::vector<he::CtWord> inputs(node.inputs.size());
    bool ok = true;
    for (std::size_t k = 0; ok && k < node.inputs.size(); ++k) {
      const auto& slot = node.inputs[k];
      if (slot.external) {
        auto v = x.find(slot.external_name);
        if (v == x.end() || !v->second) throw Error("input '" + slot.external_name + "' is unassigned");
        EncodeQuery q;
        q.kind = QueryKind::Q1;
        q.table = i;
        q.slot = k;
        q.word = table::encode_external(*v->second, slot.type, h).to_bits(m);
        std::size_t qi = 0;
        const EncodeAnswer a = ask(dev, q, &qi);
        if (a.null || a.word.size() != static_cast<std::size_t>(m)) {
          fail(vga::table_label(i) + ": developer refused to encode input " + std::to_string(k));
          ok = false;
          break;
        }
        if (general) check_answer(dev, qi, i, Target::Input, k, a.word, q.word);
        inputs[k] = a.word;
      } else {
        std::optional<std::size_t> from;
        if (!producer(slot.group, slot.port, from) || !from) {
          ok = false;
          break;
        }
        inputs[k] = runs[*from].outputs[slot.port];
      }
    }
    if (!ok) continue;

    auto& run = runs[i];
    run.inputs = inputs;
    run.outputs = evaluator_.evaluate(i, inputs);
    run.evaluated = true;
    EncodeQuery q;
    q.kind = QueryKind::Q2;
    q.table = i;
    q.inputs = inputs;
    q.outputs = run.outputs;
    std::size_t qi = 0;
    run.answer = ask(dev, q, &qi);
    if (run.answer.null) {
      run.null = true;
      fail(vga::table_label(i) + ": developer answered null");
      continue;
    }
    bool valid = run.answer.ports.size() == node.outputs.size();
    for (std::size_t j = 0; valid && j < node.outputs.size(); ++j) {
      const auto& p = run.answer.ports[j];
      if (node.outputs[j].external_name) valid = p.kind == PortKind::Bottom || (p.kind == PortKind::Payload && p.payload.size() == static_cast<std::size_t>(h));
      else valid = p.kind != PortKind::Payload;
    }
    if (!valid) {
      run.null = true;
      fail(vga::table_label(i) + ": malformed answer");
      continue;
    }
    if (general)
      for (std::size_t j = 0; j < node.outputs.size(); ++j)
        check_answer(dev, qi, i, Target::Output, j, run.outputs[j], expected_word(run.answer.ports[j], m));
  }

  for (const auto& port : s.outputs) {
    std::optional<std::int64_t> value;
    const auto [group, j] = external_source(s, port.name);
    std::optional<std::size_t> from;
    if (producer(group, j, from) && from) {
      const auto& p = runs[*from].answer.ports[j];
      BitVec w = table::top_tag_bits(m);
      w.insert(w.end(), p.payload.begin(), p.payload.end());
      try {
        value = table::TaggedValue::from_bits(w, port.type).payload;
      } catch (const FormatError&) {
        fail(vga::table_label(*from) + ": payload is not a valid " + table::to_string(port.type));
      }
    }
    res.y[port.name] = value;
  }
  return res;
}

SessionResult Verifier::run(DeveloperLink& dev) {
  SessionResult out;
  dev.open(cfg_.session);
  auto record = [&](const std::string& source, const table::Assignment& x, const table::Assignment& expected) {
    EvalResult r = eval_encrypted(dev, x);
    bool ok = r.y == expected;
    if (source == "cp")
      for (const auto& [k, v] : r.y) ok = ok && v.has_value();
    cert_.results.push_back({source, x, r.y, expected, ok});
    out.runs.push_back(std::move(r));
  };

  const vga::Suite suite = vga::generate_suite(pp_.structure, spec_, cfg_.suite);
  const vga::Domain dom = vga::input_domain(spec_.inputs, spec_.payload_bits());
  for (std::size_t k = 0; k < suite.paths.size(); ++k) {
    table::Assignment x = suite.inputs[k];
    if (cfg_.suite.developer_paths()) {
      audit::QaeRecord r;
      r.path = true;
      r.pq = {suite.paths[k]};
      r.pa = dev.path(r.pq);
      if (r.pa && dom.contains(*r.pa)) x = *r.pa;
      cert_.qa_e.push_back(std::move(r));
    }
    record("suite", x, table::evaluate_original(spec_, x));
  }
  for (const auto& x : cfg_.extra_inputs) record("extra", x, table::evaluate_original(spec_, x));
  for (const auto& c : cp_) record("cp", c.x, c.y);
  dev.close();

  bool accept = cert_.failures.empty();
  for (const auto& r : cert_.results) accept = accept && r.ok;
  cert_.accept = accept;
  out.accept = accept;
  out.certificate = cert_;
  return out;
}

SessionResult verify_session(const PublicParams& pp, const std::string& spec_source,
                             const std::vector<vga::CriticalPoint>& cp, const VerifierConfig& cfg, DeveloperLink& dev,
                             std::shared_ptr<EvalCache> cache) {
  Verifier v(pp, spec_source, cp, cfg, std::move(cache));
  return v.run(dev);
}

}  // namespace tabverify::protocol
