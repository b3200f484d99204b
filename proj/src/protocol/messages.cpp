#include "tabverify/messages.hpp"

#include <map>
#include <mutex>

namespace tabverify::protocol {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::vector<std::string> words_to_json(const std::vector<he::CtWord>& ws) {
  std::vector<std::string> out;
  for (const auto& w : ws) out.push_back(word_to_base64(w));
  return out;
}

std::vector<he::CtWord> words_from_json(const nlohmann::json& j, const he::PublicKey& pk) {
  std::vector<he::CtWord> out;
  for (const auto& s : j) out.push_back(word_from_base64(s.get<std::string>(), pk));
  return out;
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::Honest ? "honest" : "general"; }

Mode mode_from_string(const std::string& s) {
  if (s == "honest") return Mode::Honest;
  if (s == "general") return Mode::General;
  throw FormatError("unknown mode '" + s + "' (expected honest or general)");
}

namespace {

// U depends only on the budget; building it dominates parameter loading.
std::shared_ptr<const circuit::UniversalCircuit> universal_for(const circuit::UniversalBudget& b, bool projections) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const circuit::UniversalCircuit>> built;
  const std::string key = b.to_json().dump() + (projections ? "+p" : "");
  std::lock_guard<std::mutex> lock(mu);
  auto it = built.find(key);
  if (it != built.end()) return it->second;
  if (built.size() >= 8) built.clear();
  auto u = std::make_shared<const circuit::UniversalCircuit>(circuit::build_universal(b, projections));
  built.emplace(key, u);
  return u;
}

}  // namespace

void PublicParams::prepare(bool with_projections) {
  universal = universal_for(budget, with_projections);
  const std::size_t m = static_cast<std::size_t>(width());
  cipher_tag = std::make_shared<circuit::Circuit>(
      symcrypto::se_enc_circuit(cipher_spec(m / 2), static_cast<std::size_t>(K), m));
  cipher_word = std::make_shared<circuit::Circuit>(symcrypto::se_enc_circuit(cipher_spec(m), static_cast<std::size_t>(K), m));
}

const circuit::Circuit& PublicParams::cipher_circuit(std::size_t block_bits) const {
  if (block_bits == half() && cipher_tag) return *cipher_tag;
  if (block_bits == static_cast<std::size_t>(width()) && cipher_word) return *cipher_word;
  throw Error("no cipher circuit for " + std::to_string(block_bits) + "-bit blocks");
}

nlohmann::json PublicParams::to_json() const {
  const auto pk = hpk->serialize();
  return {{"K", K},
          {"structure", structure.to_json()},
          {"hpk", base64_encode(pk)},
          {"budget", budget.to_json()},
          {"universal_digest", universal ? universal->circuit.digest() : std::string()},
          {"programs", words_to_json(programs)},
          {"cipher_rounds", cipher_rounds},
          {"code", code.to_json()}};
}

PublicParams PublicParams::from_json(const nlohmann::json& j) {
  PublicParams p;
  std::string digest;
  guarded("public parameters", [&] {
    p.K = j.at("K").get<int>();
    p.structure = table::StructureGraph::from_json(j.at("structure"));
    p.hpk = he::load_public_key(base64_decode(j.at("hpk").get<std::string>()));
    p.budget = circuit::UniversalBudget::from_json(j.at("budget"));
    p.programs = words_from_json(j.at("programs"), *p.hpk);
    p.cipher_rounds = j.at("cipher_rounds").get<int>();
    p.code = commitment::CodeSpec::from_json(j.at("code"));
    digest = j.at("universal_digest").get<std::string>();
    return 0;
  });
  if (p.K < 8) throw FormatError("public parameters: K below 8");
  if (p.cipher_rounds < 1 || p.cipher_rounds > 64) throw FormatError("public parameters: bad cipher round count");
  if (p.programs.size() != p.structure.nodes.size())
    throw FormatError("public parameters: one encrypted program per table expected");
  for (const auto& w : p.programs)
    if (w.size() != p.budget.program_bits()) throw FormatError("public parameters: program length differs from |S_C|");
  if (p.budget.input_bits < p.structure.max_input_words() * static_cast<std::size_t>(p.width()) ||
      p.budget.output_bits < p.structure.max_output_words() * static_cast<std::size_t>(p.width()))
    throw FormatError("public parameters: universal circuit too narrow for the structure");
  p.prepare();
  if (p.universal->circuit.digest() != digest) throw FormatError("public parameters: universal circuit digest mismatch");
  return p;
}

std::string PublicParams::digest() const { return sha256_hex(to_json().dump()); }

std::string word_to_base64(const he::CtWord& w) { return base64_encode(he::concat(w)); }

he::CtWord word_from_base64(const std::string& s, const he::PublicKey& pk) {
  const auto bytes = base64_decode(s);
  he::CtWord w = he::split(bytes, pk.ciphertext_bytes());
  for (const auto& c : w) pk.check(c);
  return w;
}

nlohmann::json EncodeQuery::to_json() const {
  if (kind == QueryKind::Q1) return {{"kind", "q1"}, {"table", table}, {"slot", slot}, {"word", bits_to_string(word)}};
  return {{"kind", "q2"}, {"table", table}, {"inputs", words_to_json(inputs)}, {"outputs", words_to_json(outputs)}};
}

EncodeQuery EncodeQuery::from_json(const nlohmann::json& j, const he::PublicKey& pk) {
  return guarded("encode query", [&] {
    EncodeQuery q;
    const auto kind = j.at("kind").get<std::string>();
    q.table = j.at("table").get<std::size_t>();
    if (kind == "q1") {
      q.kind = QueryKind::Q1;
      q.slot = j.at("slot").get<std::size_t>();
      q.word = bits_from_string(j.at("word").get<std::string>());
    } else if (kind == "q2") {
      q.kind = QueryKind::Q2;
      q.inputs = words_from_json(j.at("inputs"), pk);
      q.outputs = words_from_json(j.at("outputs"), pk);
    } else {
      throw FormatError("unknown encode query kind '" + kind + "'");
    }
    return q;
  });
}

nlohmann::json EncodeAnswer::to_json() const {
  if (null) return {{"null", true}};
  if (ports.empty()) return {{"word", word_to_base64(word)}};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : ports) {
    if (p.kind == PortKind::Top) arr.push_back("top");
    else if (p.kind == PortKind::Bottom) arr.push_back("bottom");
    else arr.push_back("payload:" + bits_to_string(p.payload));
  }
  return {{"ports", arr}};
}

EncodeAnswer EncodeAnswer::from_json(const nlohmann::json& j, const he::PublicKey& pk) {
  return guarded("encode answer", [&] {
    EncodeAnswer a;
    if (j.contains("null")) {
      if (!j.at("null").get<bool>()) throw FormatError("malformed encode answer: null flag");
      return null_answer();
    }
    if (j.contains("word")) {
      a.word = word_from_base64(j.at("word").get<std::string>(), pk);
      return a;
    }
    for (const auto& p : j.at("ports")) {
      const auto s = p.get<std::string>();
      if (s == "top") a.ports.push_back({PortKind::Top, {}});
      else if (s == "bottom") a.ports.push_back({PortKind::Bottom, {}});
      else if (s.rfind("payload:", 0) == 0) a.ports.push_back({PortKind::Payload, bits_from_string(s.substr(8))});
      else throw FormatError("malformed encode answer: port '" + s + "'");
    }
    if (a.ports.empty()) throw FormatError("malformed encode answer: no ports");
    return a;
  });
}

PathQuery PathQuery::from_json(const nlohmann::json& j) {
  return guarded("path query", [&] { return PathQuery{j.at("tables").get<std::vector<std::size_t>>()}; });
}

nlohmann::json path_answer_to_json(const PathAnswer& a, const std::vector<table::ExternalPort>& ports) {
  if (!a) return {{"null", true}};
  return {{"x", table::assignment_to_json(*a, ports)}};
}

PathAnswer path_answer_from_json(const nlohmann::json& j, const std::vector<table::ExternalPort>& ports) {
  return guarded("path answer", [&]() -> PathAnswer {
    if (j.contains("null")) return std::nullopt;
    return table::assignment_from_json(j.at("x"), ports);
  });
}

std::string to_string(Slice s) {
  switch (s) {
    case Slice::Word: return "word";
    case Slice::Tag: return "tag";
    case Slice::Payload: return "payload";
  }
  return "?";
}

Slice slice_for(const table::StructureGraph& s, std::size_t table, Target target, std::size_t index) {
  if (target == Target::Input) return Slice::Word;
  return s.nodes.at(table).outputs.at(index).external_name ? Slice::Payload : Slice::Tag;
}

he::CtWord take_slice(const he::CtWord& word, Slice s) {
  const std::size_t h = word.size() / 2;
  if (s == Slice::Word) return word;
  if (s == Slice::Tag) return he::CtWord(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(h));
  return he::CtWord(word.begin() + static_cast<std::ptrdiff_t>(h), word.end());
}

BitVec take_slice(const BitVec& word, Slice s) {
  const std::size_t h = word.size() / 2;
  if (s == Slice::Word) return word;
  if (s == Slice::Tag) return BitVec(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(h));
  return BitVec(word.begin() + static_cast<std::ptrdiff_t>(h), word.end());
}

nlohmann::json CheckerQuery::to_json() const {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : challenges) ch.push_back(bits_to_string(c));
  return {{"table", table},
          {"target", target == Target::Input ? "input" : "output"},
          {"index", index},
          {"p", word_to_base64(p)},
          {"y", word_to_base64(y)},
          {"challenges", ch}};
}

CheckerQuery CheckerQuery::from_json(const nlohmann::json& j, const he::PublicKey& pk) {
  return guarded("checker query", [&] {
    CheckerQuery q;
    q.table = j.at("table").get<std::size_t>();
    const auto t = j.at("target").get<std::string>();
    if (t == "input") q.target = Target::Input;
    else if (t == "output") q.target = Target::Output;
    else throw FormatError("malformed checker query: target '" + t + "'");
    q.index = j.at("index").get<std::size_t>();
    q.p = word_from_base64(j.at("p").get<std::string>(), pk);
    q.y = word_from_base64(j.at("y").get<std::string>(), pk);
    for (const auto& c : j.at("challenges")) q.challenges.push_back(bits_from_string(c.get<std::string>()));
    return q;
  });
}

nlohmann::json commit_answer_to_json(const CommitAnswer& a) {
  if (!a) return {{"null", true}};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : *a) {
    BitVec exposed;
    for (const auto& x : m.exposed) exposed.push_back(x.bit);
    arr.push_back({{"e", bits_to_string(m.e)}, {"exposed", bits_to_string(exposed)}});
  }
  return {{"blocks", arr}};
}

CommitAnswer commit_answer_from_json(const nlohmann::json& j, const std::vector<BitVec>& challenges) {
  return guarded("commit answer", [&]() -> CommitAnswer {
    if (j.contains("null")) return std::nullopt;
    const auto& blocks = j.at("blocks");
    if (blocks.size() != challenges.size()) throw FormatError("commit answer: block count differs from challenges");
    std::vector<commitment::CommitMessage> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      commitment::CommitMessage m;
      m.e = bits_from_string(blocks[b].at("e").get<std::string>());
      const BitVec exposed = bits_from_string(blocks[b].at("exposed").get<std::string>());
      std::size_t k = 0;
      for (std::size_t i = 0; i < challenges[b].size(); ++i) {
        if (challenges[b][i]) continue;
        if (k >= exposed.size()) throw FormatError("commit answer: too few exposed bits");
        m.exposed.push_back({i, exposed[k++]});
      }
      if (k != exposed.size()) throw FormatError("commit answer: too many exposed bits");
      out.push_back(std::move(m));
    }
    return out;
  });
}

nlohmann::json reveal_answer_to_json(const RevealAnswer& a) {
  if (!a) return {{"null", true}};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : *a) arr.push_back({{"seed", bits_to_string(r.seed)}, {"data", bits_to_string(r.data)}});
  return {{"blocks", arr}};
}

RevealAnswer reveal_answer_from_json(const nlohmann::json& j) {
  return guarded("reveal answer", [&]() -> RevealAnswer {
    if (j.contains("null")) return std::nullopt;
    std::vector<commitment::RevealMessage> out;
    for (const auto& b : j.at("blocks"))
      out.push_back({bits_from_string(b.at("seed").get<std::string>()), bits_from_string(b.at("data").get<std::string>())});
    return out;
  });
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  const std::string text = nlohmann::json{{"type", f.type}, {"session", f.session}, {"body", f.body}}.dump();
  if (text.size() > kMaxFrameBytes) throw Error("frame exceeds the size limit");
  std::vector<std::uint8_t> out;
  out.reserve(4 + text.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(text.size() >> s));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> payload) {
  return guarded("frame", [&] {
    const auto j = nlohmann::json::parse(payload.begin(), payload.end());
    return Frame{j.at("type").get<std::string>(), j.at("session").get<std::string>(), j.at("body")};
  });
}

}  // namespace tabverify::protocol
