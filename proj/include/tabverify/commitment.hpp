#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tabverify/common.hpp"

namespace tabverify::commitment {

// Random linear code used by the commitment: m_c message bits, q = c * m_c
// code bits, minimum distance verified by enumerating every codeword.
struct CodeSpec {
  std::size_t message_bits = 0;  // m_c
  std::size_t length = 0;        // q
  double epsilon = 0;
  std::size_t security = 0;      // K
  std::vector<BitVec> generator; // m_c rows of q bits
  std::size_t min_distance = 0;

  std::size_t ratio() const { return message_bits ? length / message_bits : 0; }  // c
  BitVec encode(std::span<const std::uint8_t> data) const;

  nlohmann::json to_json() const;
  // Re-verifies the stored distance; throws FormatError on any inconsistency.
  static CodeSpec from_json(const nlohmann::json& j);
  bool operator==(const CodeSpec&) const = default;
};

// Smallest q meeting q * log2(2 / (2 - epsilon)) >= 3K.
std::size_t min_code_length(double epsilon, std::size_t K);

// Throws BudgetError when no code is found within the retry bound.
CodeSpec gen_code(std::size_t m_c, double epsilon, std::size_t K, std::uint64_t seed);
inline CodeSpec default_code(std::size_t K = 16, std::uint64_t seed = 1) { return gen_code(4, 0.25, K, seed); }

// Receiver challenge: 2q bits with exactly q ones.
BitVec choose_challenge(std::size_t q, Rng& rng);

struct ExposedBit {
  std::size_t index = 0;
  std::uint8_t bit = 0;
  bool operator==(const ExposedBit&) const = default;
};

struct CommitMessage {
  BitVec e;                      // q bits
  std::vector<ExposedBit> exposed;  // B_i(s) for every i with r_i = 0
  bool operator==(const CommitMessage&) const = default;
};

struct RevealMessage {
  BitVec seed;
  BitVec data;  // m_c bits
  bool operator==(const RevealMessage&) const = default;
};

// Throws Error on a malformed challenge or data width.
CommitMessage commit_respond(std::span<const std::uint8_t> data, std::span<const std::uint8_t> challenge,
                             std::span<const std::uint8_t> seed, const CodeSpec& code);
bool verify_reveal(const CommitMessage& commit, const RevealMessage& reveal, std::span<const std::uint8_t> challenge,
                   const CodeSpec& code);

// Commitment to an arbitrary bit string: zero-padded m_c-bit blocks, each with
// its own challenge and seed.
struct BlockTranscript {
  BitVec challenge;
  CommitMessage commit;
  RevealMessage reveal;
  bool operator==(const BlockTranscript&) const = default;
};

struct Transcript {
  std::size_t data_bits = 0;
  std::vector<BlockTranscript> blocks;

  // Accepts iff every block verifies; the opened data is returned via `data`.
  bool verify(const CodeSpec& code, BitVec* data = nullptr) const;
  nlohmann::json to_json() const;
  static Transcript from_json(const nlohmann::json& j);
  bool operator==(const Transcript&) const = default;
};

std::size_t block_count(std::size_t data_bits, const CodeSpec& code);

// Committer side of one block: fresh seed, answer to the given challenge.
struct Committer {
  explicit Committer(const CodeSpec& code) : code_(code) {}
  CommitMessage commit(std::span<const std::uint8_t> block, std::span<const std::uint8_t> challenge, Rng& rng);
  RevealMessage reveal() const { return {seed_, data_}; }

 private:
  const CodeSpec& code_;
  BitVec seed_;
  BitVec data_;
};

}  // namespace tabverify::commitment
