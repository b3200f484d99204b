#include "tabverify/protocol.hpp"

namespace tabverify::protocol {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Honest: return "honest";
    case Strategy::FlipPayload: return "flip-payload";
    case Strategy::FlipTag: return "flip-tag";
    case Strategy::SwapAnswers: return "swap-answers";
    case Strategy::ReplayForeign: return "replay-foreign";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  for (Strategy k : {Strategy::Honest, Strategy::FlipPayload, Strategy::FlipTag, Strategy::SwapAnswers,
                     Strategy::ReplayForeign})
    if (to_string(k) == s) return k;
  throw FormatError("unknown strategy '" + s + "'");
}

std::shared_ptr<const DeveloperSetup> vs_encrypt(int K, const table::TableGraph& g, const EncryptConfig& cfg, Rng& rng) {
  return vs_encrypt(K, g, cfg, he::keygen(cfg.backend, K, rng), rng);
}

std::shared_ptr<const DeveloperSetup> vs_encrypt(int K, const table::TableGraph& g, const EncryptConfig& cfg,
                                                 he::KeyPair keys, Rng& rng) {
  auto d = std::make_shared<DeveloperSetup>();
  d->graph = g;
  d->transformed = table::transform(g);
  for (std::size_t i = 0; i < d->transformed.size(); ++i) d->circuits.push_back(circuit::compile(d->transformed, i));
  d->keys = std::move(keys);

  PublicParams& pp = d->params;
  pp.K = K;
  pp.structure = d->transformed.structure;
  pp.hpk = d->keys.pk;
  pp.budget = circuit::fit_budget(d->circuits);
  pp.cipher_rounds = cfg.cipher_rounds;
  pp.code = commitment::gen_code(cfg.code_message_bits, cfg.code_epsilon, static_cast<std::size_t>(K), cfg.code_seed);
  pp.prepare();

  const int limit = pp.hpk->depth_budget();
  if (limit >= 0) {
    const int need = circuit::depth(pp.universal->circuit).multiplicative;
    if (need > limit)
      throw BudgetError("universal circuit needs multiplicative depth " + std::to_string(need) + " but the " +
                        he::to_string(pp.hpk->kind()) + " backend supports " + std::to_string(limit));
  }
  for (const auto& c : d->circuits) pp.programs.push_back(he::enc_word(*pp.hpk, circuit::encode_program(c, pp.budget), rng));
  return d;
}

std::optional<std::vector<he::CtWord>> EvalCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void EvalCache::put(const std::string& key, const std::vector<he::CtWord>& value) {
  std::lock_guard<std::mutex> lock(mu_);
  if (map_.size() >= limit_) map_.clear();
  map_.emplace(key, value);
}

TableEvaluator::TableEvaluator(const PublicParams& pp, std::shared_ptr<EvalCache> cache) : pp_(pp), cache_(std::move(cache)) {
  if (!cache_) return;
  const std::string fp = pp.hpk->fingerprint() + (pp.universal ? pp.universal->circuit.digest() : std::string());
  for (const auto& w : pp.programs) {
    const auto bytes = he::concat(w);
    program_digests_.push_back(sha256_hex(fp + std::string(bytes.begin(), bytes.end())));
  }
}

he::CtWord TableEvaluator::bus(std::size_t table, const std::vector<he::CtWord>& inputs) const {
  if (table >= pp_.table_count()) throw Error("evaluate: no table " + std::to_string(table));
  const auto& node = pp_.structure.nodes[table];
  if (inputs.size() != node.inputs.size()) throw Error("evaluate: " + vga::table_label(table) + " takes " +
                                                       std::to_string(node.inputs.size()) + " input words");
  const std::size_t m = static_cast<std::size_t>(pp_.width());
  he::CtWord x = pp_.programs[table];
  for (const auto& w : inputs) {
    if (w.size() != m) throw Error("evaluate: input word of wrong width");
    x.insert(x.end(), w.begin(), w.end());
  }
  const he::Ciphertext zero = pp_.hpk->trivial(false);
  x.resize(pp_.budget.program_bits() + pp_.budget.input_bits, zero);
  return x;
}

namespace {

std::vector<he::CtWord> split_words(const he::CtWord& flat, std::size_t words, std::size_t m) {
  std::vector<he::CtWord> out;
  for (std::size_t k = 0; k < words; ++k)
    out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(k * m), flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * m));
  return out;
}

}  // namespace

std::vector<he::CtWord> TableEvaluator::evaluate(std::size_t table, const std::vector<he::CtWord>& inputs) const {
  const he::CtWord x = bus(table, inputs);
  std::string key;
  if (cache_) {
    std::string in;
    for (const auto& w : inputs) {
      const auto b = he::concat(w);
      in.append(b.begin(), b.end());
    }
    key = program_digests_[table] + sha256_hex(in);
    if (auto hit = cache_->find(key)) return *hit;
  }
  const std::size_t m = static_cast<std::size_t>(pp_.width());
  const std::size_t words = pp_.structure.nodes[table].outputs.size();
  const he::CtWord all = pp_.hpk->eval_all(pp_.universal->circuit, x);
  auto out = split_words(all, words, m);
  if (cache_) cache_->put(key, out);
  return out;
}

std::vector<he::CtWord> TableEvaluator::evaluate_projections(std::size_t table, const std::vector<he::CtWord>& inputs) const {
  if (!pp_.universal || pp_.universal->projections.empty()) throw Error("evaluate: projections were not built");
  const he::CtWord x = bus(table, inputs);
  const std::size_t m = static_cast<std::size_t>(pp_.width());
  const std::size_t words = pp_.structure.nodes[table].outputs.size();
  he::CtWord flat;
  for (std::size_t k = 0; k < words * m; ++k) flat.push_back(he::eval(*pp_.hpk, pp_.universal->projections[k], x));
  return split_words(flat, words, m);
}

std::optional<table::Assignment> find_path_input(const table::TableGraph& g, const table::TransformedGraph& tg,
                                                 const vga::Path& tables, std::uint64_t search_budget) {
  if (!vga::is_path(tg.structure, tables)) return std::nullopt;
  const vga::Domain dom = vga::input_domain(g.inputs, g.payload_bits());
  auto covers = [&](const table::Assignment& x) {
    const auto r = table::evaluate_plain(tg, x);
    for (std::size_t t : tables) {
      const auto& tr = r.trace[t];
      if (!tr.evaluated) return false;
      for (const auto& v : tr.outputs)
        if (!v.top) return false;
    }
    return true;
  };
  if (dom.size() <= search_budget) {
    for (std::uint64_t i = 0; i < dom.size(); ++i) {
      auto x = dom.at(i);
      if (covers(x)) return x;
    }
    return std::nullopt;
  }
  std::uint64_t seed = 0x70617468;
  for (std::size_t t : tables) seed = mix64(seed ^ t);
  Rng rng(seed);
  for (std::uint64_t i = 0; i < search_budget; ++i) {
    auto x = dom.sample(rng);
    if (covers(x)) return x;
  }
  return std::nullopt;
}

vga::CoverageReport coverage_report(const audit::Certificate& c) {
  std::vector<vga::Observation> obs;
  for (const auto& r : c.qa_e) {
    if (r.path || r.q.kind != QueryKind::Q2) continue;
    vga::Outcome o = vga::Outcome::Null;
    if (!r.a.null) {
      o = vga::Outcome::Bottom;
      for (const auto& p : r.a.ports)
        if (p.kind != PortKind::Bottom) o = vga::Outcome::Top;
    }
    obs.push_back({r.q.table, o});
  }
  return vga::coverage_report(c.params.table_count(), obs);
}

}  // namespace tabverify::protocol
