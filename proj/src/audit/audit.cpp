#include "tabverify/audit.hpp"

namespace tabverify::audit {

namespace {

class ReplayMismatch : public Error {
 public:
  using Error::Error;
};

// Serves the recorded answers to a re-run verifier, insisting on the recorded queries.
class ReplayLink final : public protocol::DeveloperLink {
 public:
  explicit ReplayLink(const Certificate& c) : c_(c) {}

  protocol::EncodeAnswer encode(const protocol::EncodeQuery& q) override {
    const QaeRecord& r = next_qae();
    if (r.path || !(r.q == q)) throw ReplayMismatch("encode query " + std::to_string(qae_ - 1) + " differs from the record");
    return r.a;
  }

  protocol::PathAnswer path(const protocol::PathQuery& q) override {
    const QaeRecord& r = next_qae();
    if (!r.path || !(r.pq == q)) throw ReplayMismatch("path query " + std::to_string(qae_ - 1) + " differs from the record");
    return r.pa;
  }

  protocol::CommitAnswer checker(const protocol::CheckerQuery& q) override {
    if (qac_ >= c_.qa_c.size()) throw ReplayMismatch("verifier issues an unrecorded checker query");
    const QacRecord& r = c_.qa_c[qac_++];
    if (!(r.q == q)) throw ReplayMismatch("checker query " + std::to_string(qac_ - 1) + " differs from the record");
    return r.commits;
  }

  protocol::RevealAnswer proof(const he::CtWord&) override {
    if (qac_ == 0 || !c_.qa_c[qac_ - 1].proof_sent) throw ReplayMismatch("verifier sends an unrecorded proof request");
    return c_.qa_c[qac_ - 1].reveals;
  }

  bool consumed() const { return qae_ == c_.qa_e.size() && qac_ == c_.qa_c.size(); }

 private:
  const QaeRecord& next_qae() {
    if (qae_ >= c_.qa_e.size()) throw ReplayMismatch("verifier issues an unrecorded query");
    return c_.qa_e[qae_++];
  }

  const Certificate& c_;
  std::size_t qae_ = 0;
  std::size_t qac_ = 0;
};

AuditReport fail(std::string why) { return {false, std::move(why)}; }

std::string first_difference(const nlohmann::json& a, const nlohmann::json& b) {
  for (auto it = a.begin(); it != a.end(); ++it)
    if (!b.contains(it.key()) || b.at(it.key()) != it.value()) return it.key();
  return "?";
}

AuditReport recompute(const Certificate& c, const protocol::TableEvaluator& ev) {
  for (std::size_t k = 0; k < c.qa_e.size(); ++k) {
    const auto& r = c.qa_e[k];
    if (r.path || r.q.kind != protocol::QueryKind::Q2) continue;
    if (r.q.table >= c.params.table_count()) return fail("query " + std::to_string(k) + " names an unknown table");
    bool same = false;
    try {
      same = ev.evaluate(r.q.table, r.q.inputs) == r.q.outputs;
    } catch (const Error&) {
      same = false;
    }
    if (!same) return fail("recorded output of " + vga::table_label(r.q.table) + " (query " + std::to_string(k) + ") does not match re-evaluation");
  }
  return {true, {}};
}

AuditReport replay(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache) {
  protocol::VerifierConfig cfg;
  cfg.mode = c.mode;
  cfg.suite = c.vga;
  cfg.extra_inputs = c.extra_inputs;
  cfg.coins = c.coins;
  cfg.session = c.session;
  ReplayLink link(c);
  protocol::SessionResult r;
  try {
    protocol::Verifier v(c.params, c.spec, c.cp, cfg, std::move(cache));
    r = v.run(link);
  } catch (const ReplayMismatch& e) {
    return fail(std::string("replay: ") + e.what());
  } catch (const Error& e) {
    return fail(std::string("replay aborted: ") + e.what());
  }
  if (!link.consumed()) return fail("replay: record holds queries the verifier never issues");
  const nlohmann::json mine = to_json(r.certificate);
  const nlohmann::json theirs = to_json(c);
  if (mine != theirs) return fail("replay: recorded field '" + first_difference(theirs, mine) + "' differs from the re-run");
  return {true, {}};
}

AuditReport general_checks(const Certificate& c) {
  const auto& pp = c.params;
  const int m = pp.width();
  const symcrypto::SeKey sk{c.sk};
  if (c.sk.size() != static_cast<std::size_t>(pp.K) || c.ct_sk.size() != static_cast<std::size_t>(pp.K))
    return fail("disclosed key has the wrong length");

  // Expected plaintext behind each checked word, indexed by (qae, target, index).
  std::vector<std::vector<int>> seen(c.qa_e.size());
  for (std::size_t k = 0; k < c.qa_e.size(); ++k) {
    const auto& r = c.qa_e[k];
    if (r.path || r.a.null) continue;
    if (r.q.table >= pp.table_count()) return fail("query " + std::to_string(k) + " names an unknown table");
    seen[k].assign(r.q.kind == protocol::QueryKind::Q1 ? 1 : r.a.ports.size(), 0);
  }

  for (std::size_t t = 0; t < c.qa_c.size(); ++t) {
    const auto& r = c.qa_c[t];
    const std::string where = "checker tuple " + std::to_string(t);
    if (r.qae >= c.qa_e.size() || c.qa_e[r.qae].path || c.qa_e[r.qae].a.null) return fail(where + " points to no encode answer");
    const auto& e = c.qa_e[r.qae];
    if (r.q.table != e.q.table) return fail(where + " names the wrong table");
    BitVec expected;
    std::size_t slot = 0;
    if (e.q.kind == protocol::QueryKind::Q1) {
      if (r.q.target != protocol::Target::Input || r.q.index != e.q.slot || r.q.p != e.a.word)
        return fail(where + " does not check the recorded input encoding");
      expected = e.q.word;
    } else {
      if (r.q.target != protocol::Target::Output || r.q.index >= e.a.ports.size() || r.q.index >= e.q.outputs.size() ||
          r.q.p != e.q.outputs[r.q.index])
        return fail(where + " does not check a recorded output word");
      slot = r.q.index;
      const auto& p = e.a.ports[slot];
      expected.assign(static_cast<std::size_t>(m), 0);
      if (p.kind != protocol::PortKind::Bottom) {
        expected = table::top_tag_bits(m);
        if (p.kind == protocol::PortKind::Payload) expected.insert(expected.end(), p.payload.begin(), p.payload.end());
        expected.resize(static_cast<std::size_t>(m), 0);
      }
    }
    seen[r.qae][slot]++;

    const auto slice = protocol::slice_for(pp.structure, r.q.table, r.q.target, r.q.index);
    const he::CtWord sp = protocol::take_slice(r.q.p, slice);
    he::CtWord x = c.ct_sk;
    x.insert(x.end(), sp.begin(), sp.end());
    if (pp.hpk->eval_all(pp.cipher_circuit(sp.size()), x) != r.q.y) return fail(where + ": cipher output does not recompute");
    const auto tr = r.transcript(sp.size());
    BitVec d;
    bool opened = false;
    try {
      opened = tr && tr->verify(pp.code, &d);
    } catch (const Error&) {
      opened = false;
    }
    if (!opened) return fail(where + ": commitment does not open");
    if (symcrypto::se_dec(pp.cipher_spec(sp.size()), sk, d) != protocol::take_slice(expected, slice))
      return fail(where + ": decrypted word does not match the recorded answer");
  }

  for (std::size_t k = 0; k < seen.size(); ++k)
    for (std::size_t j = 0; j < seen[k].size(); ++j)
      if (seen[k][j] != 1) return fail("encode answer " + std::to_string(k) + " lacks exactly one checker tuple");
  return {true, {}};
}

}  // namespace

AuditReport vs_eval_honest(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache) {
  if (!cache) cache = std::make_shared<protocol::EvalCache>();
  const protocol::TableEvaluator ev(c.params, cache);
  if (auto r = recompute(c, ev); !r.ok) return r;
  return replay(c, cache);
}

AuditReport vs_eval_general(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache) {
  if (c.mode != protocol::Mode::General) return fail("certificate was not produced in general mode");
  try {
    if (auto r = general_checks(c); !r.ok) return r;
  } catch (const Error& e) {
    return fail(std::string("general checks aborted: ") + e.what());
  }
  return vs_eval_honest(c, std::move(cache));
}

AuditReport audit_certificate(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache) {
  return c.mode == protocol::Mode::General ? vs_eval_general(c, std::move(cache)) : vs_eval_honest(c, std::move(cache));
}

AuditReport audit_text(const std::string& text, std::shared_ptr<protocol::EvalCache> cache) {
  Certificate c;
  try {
    c = parse_certificate(text);
  } catch (const Error& e) {
    return fail(std::string("certificate rejected: ") + e.what());
  }
  return audit_certificate(c, std::move(cache));
}

namespace {

void collect(const nlohmann::json& j, const std::string& at, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) collect(it.value(), at + "/" + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) collect(j[i], at + "/" + std::to_string(i), out);
  } else {
    out.push_back(at);
  }
}

bool base64_field(const std::string& ptr) {
  const auto last = ptr.substr(ptr.rfind('/') + 1);
  if (last == "word" || last == "p" || last == "y" || last == "ct_sk") return true;
  return ptr.find("/inputs/") != std::string::npos || ptr.find("/outputs/") != std::string::npos;
}

bool bit_string(const std::string& s) {
  return !s.empty() && s.find_first_not_of("01") == std::string::npos;
}

}  // namespace

std::string mutate(nlohmann::json& j, Rng& rng) {
  std::vector<std::string> leaves;
  for (const char* part : {"qa_e", "qa_c", "cp", "extra_inputs", "results", "verdict", "failures", "coins", "sk", "ct_sk", "vga"})
    if (j.contains(part)) collect(j[part], std::string("/") + part, leaves);
  if (leaves.empty()) throw Error("mutate: nothing to change");
  const std::string ptr = leaves[rng.below(leaves.size())];
  auto& v = j[nlohmann::json::json_pointer(ptr)];
  if (v.is_boolean()) {
    v = !v.get<bool>();
  } else if (v.is_number_unsigned()) {
    v = v.get<std::uint64_t>() ^ (std::uint64_t{1} << rng.below(4));
  } else if (v.is_number_integer()) {
    v = v.get<std::int64_t>() + 1;
  } else if (v.is_null()) {
    v = 0;
  } else if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (base64_field(ptr)) {
      auto bytes = base64_decode(s);
      if (bytes.empty()) bytes.push_back(0);
      bytes[rng.below(bytes.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
      s = base64_encode(bytes);
    } else if (s == "top" || s == "bottom") {
      s = s == "top" ? "bottom" : "top";
    } else if (s.rfind("payload:", 0) == 0 && s.size() > 8) {
      const std::size_t i = 8 + rng.below(s.size() - 8);
      s[i] = s[i] == '0' ? '1' : '0';
    } else if (s == "accept" || s == "reject") {
      s = s == "accept" ? "reject" : "accept";
    } else if (bit_string(s)) {
      const std::size_t i = rng.below(s.size());
      s[i] = s[i] == '0' ? '1' : '0';
    } else {
      s += "x";
    }
    v = s;
  } else {
    v = nullptr;
  }
  return ptr;
}

FuzzReport fuzz(const std::string& certificate_text, std::size_t trials, std::uint64_t seed,
                std::shared_ptr<protocol::EvalCache> cache) {
  if (!cache) cache = std::make_shared<protocol::EvalCache>();
  const nlohmann::json base = nlohmann::json::parse(certificate_text);
  Rng rng(seed);
  FuzzReport rep;
  for (std::size_t t = 0; t < trials; ++t) {
    nlohmann::json j = base;
    const std::string ptr = mutate(j, rng);
    AuditReport a;
    try {
      reseal(j);
      a = audit_certificate(from_json(j), cache);
    } catch (const Error& e) {
      a = fail(e.what());
    }
    ++rep.trials;
    if (a.ok) rep.undetected.push_back(ptr);
    else ++rep.detected;
  }
  return rep;
}

}  // namespace tabverify::audit
