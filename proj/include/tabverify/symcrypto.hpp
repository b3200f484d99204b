#pragma once

#include <cstdint>
#include <span>

#include "json.hpp"
#include "tabverify/circuit.hpp"
#include "tabverify/common.hpp"

namespace tabverify::symcrypto {

// Private key of the deterministic cipher; K = bits.size() >= 8.
struct SeKey {
  BitVec bits;
  bool operator==(const SeKey&) const = default;
};

SeKey se_keygen(std::size_t K, Rng& rng);

// Balanced Feistel permutation on block_bits-bit blocks (even, 4..64).
// Round r uses key bits rotated by 5r and masked with a public constant, so the
// schedule is linear and costs no multiplicative depth in circuit form.
struct FeistelSpec {
  std::size_t block_bits = 16;
  int rounds = 8;

  void check() const;
  nlohmann::json to_json() const;
  static FeistelSpec from_json(const nlohmann::json& j);
  bool operator==(const FeistelSpec&) const = default;
};

BitVec se_enc(const FeistelSpec& spec, const SeKey& key, std::span<const std::uint8_t> block);
BitVec se_dec(const FeistelSpec& spec, const SeKey& key, std::span<const std::uint8_t> block);

// Circuit over (key bits || block bits) computing se_enc. word_bits is the
// tagged word width m; the block must be m/2 or m bits wide.
circuit::Circuit se_enc_circuit(const FeistelSpec& spec, std::size_t key_bits, std::size_t word_bits);

// Counter-mode generator: block j is the 32-bit Feistel image of j under the
// seed. Output is prefix-consistent.
BitVec prg(std::span<const std::uint8_t> seed, std::size_t n);
bool bit_at(std::span<const std::uint8_t> seed, std::size_t i);

}  // namespace tabverify::symcrypto
