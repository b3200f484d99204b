#include <algorithm>
#include <cmath>

#include "tabverify/commitment.hpp"
#include "tabverify/symcrypto.hpp"

namespace tabverify::commitment {

namespace {

std::size_t weight(const BitVec& v) { return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1)); }

// Minimum nonzero codeword weight, which is the distance of a linear code.
std::size_t code_distance(const std::vector<BitVec>& rows, std::size_t q) {
  std::size_t best = q + 1;
  const std::size_t n = rows.size();
  for (std::uint64_t msg = 1; msg < (1ULL << n); ++msg) {
    BitVec cw(q, 0);
    for (std::size_t r = 0; r < n; ++r)
      if ((msg >> (n - 1 - r)) & 1u)
        for (std::size_t i = 0; i < q; ++i) cw[i] ^= rows[r][i];
    best = std::min(best, weight(cw));
  }
  return best;
}

void check_challenge(std::span<const std::uint8_t> challenge, std::size_t q) {
  if (challenge.size() != 2 * q) throw Error("malformed challenge: expected " + std::to_string(2 * q) + " bits");
  std::size_t ones = 0;
  for (auto b : challenge) {
    if (b > 1) throw Error("malformed challenge: non-binary entry");
    ones += b;
  }
  if (ones != q) throw Error("malformed challenge: weight " + std::to_string(ones) + " instead of " + std::to_string(q));
}

BitVec json_bits(const nlohmann::json& j) { return bits_from_string(j.get<std::string>()); }

}  // namespace

std::size_t min_code_length(double epsilon, std::size_t K) {
  if (!(epsilon > 0) || epsilon > 1) throw BudgetError("code distance ratio must lie in (0, 1]");
  const double per_bit = std::log2(2.0 / (2.0 - epsilon));
  return static_cast<std::size_t>(std::ceil(3.0 * static_cast<double>(K) / per_bit - 1e-9));
}

BitVec CodeSpec::encode(std::span<const std::uint8_t> data) const {
  if (data.size() != message_bits)
    throw Error("code input must have " + std::to_string(message_bits) + " bits, got " + std::to_string(data.size()));
  BitVec cw(length, 0);
  for (std::size_t r = 0; r < message_bits; ++r)
    if (data[r])
      for (std::size_t i = 0; i < length; ++i) cw[i] ^= generator[r][i];
  return cw;
}

CodeSpec gen_code(std::size_t m_c, double epsilon, std::size_t K, std::uint64_t seed) {
  if (m_c < 1 || m_c > 16) throw BudgetError("code message width must be within 1..16");
  const std::size_t q_min = min_code_length(epsilon, K);
  const std::size_t c = (q_min + m_c - 1) / m_c;
  CodeSpec code;
  code.message_bits = m_c;
  code.length = c * m_c;
  code.epsilon = epsilon;
  code.security = K;
  const auto need = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(code.length) - 1e-9));
  if (m_c == 1) {
    code.generator = {BitVec(code.length, 1)};
    code.min_distance = code.length;
    return code;
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    code.generator.clear();
    for (std::size_t r = 0; r < m_c; ++r) code.generator.push_back(rng.bits(code.length));
    code.min_distance = code_distance(code.generator, code.length);
    if (code.min_distance >= need) return code;
  }
  throw BudgetError("no code with distance " + std::to_string(need) + " found for m_c=" + std::to_string(m_c) +
                    ", q=" + std::to_string(code.length));
}

nlohmann::json CodeSpec::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : generator) rows.push_back(bits_to_string(r));
  return {{"message_bits", message_bits}, {"length", length},       {"epsilon", epsilon},
          {"security", security},         {"generator", rows},      {"min_distance", min_distance},
          {"ratio", ratio()}};
}

CodeSpec CodeSpec::from_json(const nlohmann::json& j) {
  CodeSpec c;
  try {
    c.message_bits = j.at("message_bits").get<std::size_t>();
    c.length = j.at("length").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.security = j.at("security").get<std::size_t>();
    c.min_distance = j.at("min_distance").get<std::size_t>();
    for (const auto& r : j.at("generator")) c.generator.push_back(json_bits(r));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed code: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(std::string("malformed code: ") + e.what());
  }
  if (c.message_bits < 1 || c.message_bits > 16 || c.generator.size() != c.message_bits)
    throw FormatError("malformed code: generator row count");
  for (const auto& r : c.generator)
    if (r.size() != c.length) throw FormatError("malformed code: generator row width");
  if (c.length % c.message_bits != 0) throw FormatError("malformed code: length is not a multiple of m_c");
  if (code_distance(c.generator, c.length) != c.min_distance)
    throw FormatError("malformed code: recorded distance does not match the generator");
  if (static_cast<double>(c.min_distance) < c.epsilon * static_cast<double>(c.length) - 1e-9)
    throw FormatError("malformed code: distance below epsilon * q");
  if (c.length < min_code_length(c.epsilon, c.security)) throw FormatError("malformed code: length below 3K bound");
  return c;
}

BitVec choose_challenge(std::size_t q, Rng& rng) {
  BitVec r(2 * q, 0);
  std::fill(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(q), 1);
  for (std::size_t i = r.size(); i > 1; --i) std::swap(r[i - 1], r[rng.below(i)]);
  return r;
}

CommitMessage commit_respond(std::span<const std::uint8_t> data, std::span<const std::uint8_t> challenge,
                             std::span<const std::uint8_t> seed, const CodeSpec& code) {
  check_challenge(challenge, code.length);
  const BitVec cw = code.encode(data);
  const BitVec stream = symcrypto::prg(seed, challenge.size());
  CommitMessage msg;
  for (std::size_t i = 0; i < challenge.size(); ++i) {
    if (challenge[i]) {
      msg.e.push_back(cw[msg.e.size()] ^ stream[i]);
    } else {
      msg.exposed.push_back({i, stream[i]});
    }
  }
  return msg;
}

bool verify_reveal(const CommitMessage& commit, const RevealMessage& reveal, std::span<const std::uint8_t> challenge,
                   const CodeSpec& code) {
  try {
    check_challenge(challenge, code.length);
  } catch (const Error&) {
    return false;
  }
  if (reveal.data.size() != code.message_bits || reveal.seed.size() < 8) return false;
  if (commit.e.size() != code.length || commit.exposed.size() != code.length) return false;
  const BitVec stream = symcrypto::prg(reveal.seed, challenge.size());
  const BitVec cw = code.encode(reveal.data);
  std::size_t one = 0;
  std::size_t zero = 0;
  for (std::size_t i = 0; i < challenge.size(); ++i) {
    if (challenge[i]) {
      if (commit.e[one] != (cw[one] ^ stream[i])) return false;
      ++one;
    } else {
      const ExposedBit& x = commit.exposed[zero++];
      if (x.index != i || x.bit != stream[i]) return false;
    }
  }
  return true;
}

std::size_t block_count(std::size_t data_bits, const CodeSpec& code) {
  return (data_bits + code.message_bits - 1) / code.message_bits;
}

CommitMessage Committer::commit(std::span<const std::uint8_t> block, std::span<const std::uint8_t> challenge,
                                Rng& rng) {
  seed_ = rng.bits(code_.security);
  data_.assign(block.begin(), block.end());
  return commit_respond(data_, challenge, seed_, code_);
}

bool Transcript::verify(const CodeSpec& code, BitVec* data) const {
  if (blocks.size() != block_count(data_bits, code) || blocks.empty()) return false;
  BitVec out;
  for (const auto& b : blocks) {
    if (!verify_reveal(b.commit, b.reveal, b.challenge, code)) return false;
    out.insert(out.end(), b.reveal.data.begin(), b.reveal.data.end());
  }
  // Padding bits must be zero.
  for (std::size_t i = data_bits; i < out.size(); ++i)
    if (out[i]) return false;
  out.resize(data_bits);
  if (data) *data = std::move(out);
  return true;
}

nlohmann::json Transcript::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : blocks) {
    nlohmann::json exposed = nlohmann::json::array();
    for (const auto& x : b.commit.exposed) exposed.push_back({x.index, x.bit});
    arr.push_back({{"challenge", bits_to_string(b.challenge)},
                   {"e", bits_to_string(b.commit.e)},
                   {"exposed", exposed},
                   {"seed", bits_to_string(b.reveal.seed)},
                   {"data", bits_to_string(b.reveal.data)}});
  }
  return {{"data_bits", data_bits}, {"blocks", arr}};
}

Transcript Transcript::from_json(const nlohmann::json& j) {
  Transcript t;
  try {
    t.data_bits = j.at("data_bits").get<std::size_t>();
    for (const auto& b : j.at("blocks")) {
      BlockTranscript bt;
      bt.challenge = json_bits(b.at("challenge"));
      bt.commit.e = json_bits(b.at("e"));
      for (const auto& x : b.at("exposed"))
        bt.commit.exposed.push_back({x.at(0).get<std::size_t>(), x.at(1).get<std::uint8_t>()});
      bt.reveal.seed = json_bits(b.at("seed"));
      bt.reveal.data = json_bits(b.at("data"));
      t.blocks.push_back(std::move(bt));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed commitment transcript: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("malformed commitment transcript: ") + e.what());
  }
  return t;
}

}  // namespace tabverify::commitment
