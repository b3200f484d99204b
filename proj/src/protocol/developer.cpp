#include "tabverify/protocol.hpp"

namespace tabverify::protocol {

std::uint64_t session_seed(std::uint64_t seed, std::uint64_t session) {
  return mix64(seed ^ mix64(session + 0x6465766c));
}

Developer::Developer(std::shared_ptr<const DeveloperSetup> setup, Strategy strategy, std::uint64_t seed,
                     std::shared_ptr<EvalCache> cache)
    : setup_(std::move(setup)), strategy_(strategy), seed_(seed), rng_(session_seed(seed, 0)), evaluator_(setup_->params, std::move(cache)) {}

void Developer::reset() {
  q1_.clear();
  q2_.clear();
  pending_.reset();
  last_q1_.reset();
  last_q1_word_.reset();
  last_q2_.reset();
  rng_ = Rng(session_seed(seed_, ++sessions_));
}

bool Developer::well_formed(const he::CtWord& w, std::size_t bits) const {
  if (w.size() != bits) return false;
  for (const auto& c : w) {
    try {
      setup_->keys.pk->check(c);
    } catch (const FormatError&) {
      return false;
    }
  }
  return true;
}

EncodeAnswer Developer::encode(const EncodeQuery& q) {
  if (q.table >= setup_->params.table_count()) return EncodeAnswer::null_answer();
  return q.kind == QueryKind::Q1 ? encode_q1(q) : encode_q2(q);
}

EncodeAnswer Developer::encode_q1(const EncodeQuery& q) {
  const auto& node = setup_->params.structure.nodes[q.table];
  const int m = setup_->params.width();
  if (q.slot >= node.inputs.size() || !node.inputs[q.slot].external) return EncodeAnswer::null_answer();
  if (q.word.size() != static_cast<std::size_t>(m)) return EncodeAnswer::null_answer();
  try {
    if (!table::TaggedValue::from_bits(q.word, node.inputs[q.slot].type).top) return EncodeAnswer::null_answer();
  } catch (const FormatError&) {
    return EncodeAnswer::null_answer();
  }

  BitVec word = q.word;
  if (strategy_ == Strategy::ReplayForeign) word.back() ^= 1;
  EncodeAnswer a;
  a.word = he::enc_word(*setup_->keys.pk, word, rng_);
  if (strategy_ == Strategy::SwapAnswers) {
    const EncodeAnswer fresh = a;
    if (last_q1_ && last_q1_word_ && *last_q1_word_ != q.word) a = *last_q1_;
    last_q1_ = fresh;
    last_q1_word_ = q.word;
  }
  q1_.push_back({q.table, q.slot, a.word});
  return a;
}

EncodeAnswer Developer::encode_q2(const EncodeQuery& q) {
  const auto& s = setup_->params.structure;
  const auto& node = s.nodes[q.table];
  const std::size_t m = static_cast<std::size_t>(s.width);
  if (q.inputs.size() != node.inputs.size() || q.outputs.size() != node.outputs.size()) return EncodeAnswer::null_answer();
  for (const auto& w : q.inputs)
    if (!well_formed(w, m)) return EncodeAnswer::null_answer();
  for (const auto& w : q.outputs)
    if (!well_formed(w, m)) return EncodeAnswer::null_answer();

  // Every input word must be something this developer handed out.
  for (std::size_t k = 0; k < node.inputs.size(); ++k) {
    const auto& slot = node.inputs[k];
    bool known = false;
    if (slot.external) {
      for (const auto& r : q1_) known = known || (r.table == q.table && r.slot == k && r.word == q.inputs[k]);
    } else {
      for (const auto& r : q2_) {
        if (s.nodes[r.table].group != slot.group || slot.port >= r.outputs.size()) continue;
        known = known || r.outputs[slot.port] == q.inputs[k];
      }
    }
    if (!known) return EncodeAnswer::null_answer();
  }
  if (evaluator_.evaluate(q.table, q.inputs) != q.outputs) return EncodeAnswer::null_answer();

  EncodeAnswer a;
  for (std::size_t j = 0; j < q.outputs.size(); ++j) {
    const BitVec bits = he::dec_word(*setup_->keys.sk, q.outputs[j]);
    table::TaggedValue v;
    try {
      v = table::TaggedValue::from_bits(bits, node.outputs[j].type);
    } catch (const FormatError&) {
      return EncodeAnswer::null_answer();
    }
    PortAnswer p;
    if (!v.top) p.kind = PortKind::Bottom;
    else if (node.outputs[j].external_name) p = {PortKind::Payload, take_slice(bits, Slice::Payload)};
    else p.kind = PortKind::Top;
    a.ports.push_back(std::move(p));
  }
  q2_.push_back({q.table, q.inputs, q.outputs});

  switch (strategy_) {
    case Strategy::FlipPayload:
      for (auto& p : a.ports)
        if (p.kind == PortKind::Payload) p.payload.back() ^= 1;
      break;
    case Strategy::FlipTag:
      for (auto& p : a.ports) {
        if (p.kind == PortKind::Top) p.kind = PortKind::Bottom;
        else if (p.kind == PortKind::Bottom && !node.outputs[&p - a.ports.data()].external_name) p.kind = PortKind::Top;
      }
      break;
    case Strategy::SwapAnswers: {
      const EncodeAnswer fresh = a;
      if (last_q2_ && last_q2_->ports.size() == a.ports.size()) a = *last_q2_;
      last_q2_ = fresh;
      break;
    }
    default: break;
  }
  return a;
}

PathAnswer Developer::path(const PathQuery& q) { return find_path_input(*setup_, q.tables); }

CommitAnswer Developer::checker(const CheckerQuery& q) {
  pending_.reset();
  const auto& pp = setup_->params;
  const std::size_t m = static_cast<std::size_t>(pp.width());
  if (q.table >= pp.table_count() || !well_formed(q.p, m)) return std::nullopt;
  const auto& node = pp.structure.nodes[q.table];
  bool known = false;
  if (q.target == Target::Input) {
    if (q.index >= node.inputs.size()) return std::nullopt;
    for (const auto& r : q1_) known = known || (r.table == q.table && r.slot == q.index && r.word == q.p);
  } else {
    if (q.index >= node.outputs.size()) return std::nullopt;
    for (const auto& r : q2_) known = known || (r.table == q.table && r.outputs[q.index] == q.p);
  }
  if (!known) return std::nullopt;

  const Slice slice = slice_for(pp.structure, q.table, q.target, q.index);
  const std::size_t bits = take_slice(q.p, slice).size();
  if (!well_formed(q.y, bits)) return std::nullopt;
  const std::size_t blocks = commitment::block_count(bits, pp.code);
  if (q.challenges.size() != blocks) return std::nullopt;

  const BitVec d = he::dec_word(*setup_->keys.sk, q.y);
  const std::size_t mc = pp.code.message_bits;
  Pending p{q, slice, {}};
  std::vector<commitment::CommitMessage> out;
  try {
    for (std::size_t b = 0; b < blocks; ++b) {
      BitVec block(mc, 0);
      for (std::size_t i = 0; i < mc && b * mc + i < bits; ++i) block[i] = d[b * mc + i];
      p.committers.emplace_back(pp.code);
      out.push_back(p.committers.back().commit(block, q.challenges[b], rng_));
    }
  } catch (const Error&) {
    return std::nullopt;  // malformed challenge
  }
  pending_ = std::move(p);
  return out;
}

RevealAnswer Developer::proof(const he::CtWord& ct_sk) {
  if (!pending_) return std::nullopt;
  Pending p = std::move(*pending_);
  pending_.reset();
  const auto& pp = setup_->params;
  if (!well_formed(ct_sk, static_cast<std::size_t>(pp.K))) return std::nullopt;
  // y must really be the cipher applied to the checked slice under ct_sk.
  he::CtWord x = ct_sk;
  const he::CtWord sp = take_slice(p.query.p, p.slice);
  x.insert(x.end(), sp.begin(), sp.end());
  if (pp.hpk->eval_all(pp.cipher_circuit(sp.size()), x) != p.query.y) return std::nullopt;
  std::vector<commitment::RevealMessage> out;
  for (const auto& c : p.committers) out.push_back(c.reveal());
  return out;
}

}  // namespace tabverify::protocol
