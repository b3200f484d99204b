#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/circuit.hpp"
#include "tabverify/commitment.hpp"
#include "tabverify/he.hpp"
#include "tabverify/symcrypto.hpp"
#include "tabverify/table.hpp"

namespace tabverify::protocol {

enum class Mode { Honest, General };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

// Everything the developer publishes: the structure graph, the encrypted
// table programs E_C, the HE public key and the public circuit/commitment
// parameters. U and the cipher circuits are rebuilt from their descriptions.
struct PublicParams {
  int K = 16;
  table::StructureGraph structure;
  std::shared_ptr<const he::PublicKey> hpk;
  circuit::UniversalBudget budget;
  std::vector<he::CtWord> programs;
  int cipher_rounds = 8;
  commitment::CodeSpec code;

  std::shared_ptr<const circuit::UniversalCircuit> universal;
  std::shared_ptr<const circuit::Circuit> cipher_tag;   // block m/2
  std::shared_ptr<const circuit::Circuit> cipher_word;  // block m

  // Builds U and the cipher circuits; called by from_json.
  void prepare(bool with_projections = false);

  int width() const { return structure.width; }
  std::size_t half() const { return static_cast<std::size_t>(structure.width / 2); }
  std::size_t table_count() const { return structure.nodes.size(); }
  std::size_t ct_bytes() const { return hpk->ciphertext_bytes(); }
  std::size_t lambda() const { return hpk->lambda(); }

  symcrypto::FeistelSpec cipher_spec(std::size_t block_bits) const { return {block_bits, cipher_rounds}; }
  const circuit::Circuit& cipher_circuit(std::size_t block_bits) const;

  nlohmann::json to_json() const;
  static PublicParams from_json(const nlohmann::json& j);
  std::string digest() const;  // sha256 of the canonical JSON
};

std::string word_to_base64(const he::CtWord& w);
// Throws FormatError on a length that is not a whole number of ciphertexts
// or a ciphertext the key could not have produced.
he::CtWord word_from_base64(const std::string& s, const he::PublicKey& pk);

enum class QueryKind { Q1, Q2 };

struct EncodeQuery {
  QueryKind kind = QueryKind::Q1;
  std::size_t table = 0;
  std::size_t slot = 0;              // q1: input slot of `table`
  BitVec word;                       // q1: plaintext tagged word
  std::vector<he::CtWord> inputs;    // q2: encrypted input words u
  std::vector<he::CtWord> outputs;   // q2: claimed outputs v

  nlohmann::json to_json() const;
  static EncodeQuery from_json(const nlohmann::json& j, const he::PublicKey& pk);
  bool operator==(const EncodeQuery&) const = default;
};

enum class PortKind { Top, Bottom, Payload };

struct PortAnswer {
  PortKind kind = PortKind::Bottom;
  BitVec payload;  // Payload only
  bool operator==(const PortAnswer&) const = default;
};

struct EncodeAnswer {
  bool null = false;
  he::CtWord word;                 // q1
  std::vector<PortAnswer> ports;   // q2

  static EncodeAnswer null_answer() { return {true, {}, {}}; }
  nlohmann::json to_json() const;
  static EncodeAnswer from_json(const nlohmann::json& j, const he::PublicKey& pk);
  bool operator==(const EncodeAnswer&) const = default;
};

struct PathQuery {
  std::vector<std::size_t> tables;
  nlohmann::json to_json() const { return {{"tables", tables}}; }
  static PathQuery from_json(const nlohmann::json& j);
  bool operator==(const PathQuery&) const = default;
};

using PathAnswer = std::optional<table::Assignment>;
nlohmann::json path_answer_to_json(const PathAnswer& a, const std::vector<table::ExternalPort>& ports);
PathAnswer path_answer_from_json(const nlohmann::json& j, const std::vector<table::ExternalPort>& ports);

// Which encode answer word a checker round is about.
enum class Target { Input, Output };

// The part of a word the cipher is applied to.
enum class Slice { Word, Tag, Payload };
std::string to_string(Slice s);
Slice slice_for(const table::StructureGraph& s, std::size_t table, Target target, std::size_t index);
he::CtWord take_slice(const he::CtWord& word, Slice s);
BitVec take_slice(const BitVec& word, Slice s);

struct CheckerQuery {
  std::size_t table = 0;
  Target target = Target::Input;
  std::size_t index = 0;  // input slot or output port
  he::CtWord p;           // the answer word being checked
  he::CtWord y;           // Eval of the cipher on (ct_sk, slice(p))
  std::vector<BitVec> challenges;  // one commitment challenge per block

  nlohmann::json to_json() const;
  static CheckerQuery from_json(const nlohmann::json& j, const he::PublicKey& pk);
  bool operator==(const CheckerQuery&) const = default;
};

using CommitAnswer = std::optional<std::vector<commitment::CommitMessage>>;
using RevealAnswer = std::optional<std::vector<commitment::RevealMessage>>;

// Commit messages omit exposed indices: they are the zero positions of the challenge.
nlohmann::json commit_answer_to_json(const CommitAnswer& a);
CommitAnswer commit_answer_from_json(const nlohmann::json& j, const std::vector<BitVec>& challenges);
nlohmann::json reveal_answer_to_json(const RevealAnswer& a);
RevealAnswer reveal_answer_from_json(const nlohmann::json& j);

// Wire frame: 4-byte big-endian length, then canonical JSON {type, session, body}.
struct Frame {
  std::string type;
  std::string session;
  nlohmann::json body;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);
// Decodes one frame payload (without the length prefix).
Frame decode_frame(std::span<const std::uint8_t> payload);
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 28;

}  // namespace tabverify::protocol
