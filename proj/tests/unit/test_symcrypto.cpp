#include <set>

#include "doctest.h"
#include "tabverify/he.hpp"
#include "tabverify/symcrypto.hpp"

using namespace tabverify;
using namespace tabverify::symcrypto;

TEST_CASE("cipher keygen") {
  Rng rng(1);
  const SeKey a = se_keygen(16, rng);
  CHECK(a.bits.size() == 16);
  CHECK_FALSE(a == se_keygen(16, rng));
  CHECK_THROWS_AS(se_keygen(0, rng), BudgetError);
  CHECK_THROWS_AS(se_keygen(7, rng), BudgetError);
}

TEST_CASE("cipher round trip and determinism") {
  Rng rng(2);
  for (std::size_t b : {8, 16, 32}) {
    const FeistelSpec spec{b, 8};
    for (int n = 0; n < 1000; ++n) {
      const SeKey key = se_keygen(16, rng);
      const BitVec m = rng.bits(b);
      const BitVec c = se_enc(spec, key, m);
      CHECK(c.size() == b);
      CHECK(se_dec(spec, key, c) == m);
      CHECK(se_enc(spec, key, m) == c);
    }
  }
  const SeKey key = se_keygen(16, rng);
  CHECK_THROWS(se_enc({8, 8}, key, BitVec(7)));
  CHECK_THROWS(se_enc({7, 8}, key, BitVec(7)));
}

TEST_CASE("cipher is a permutation for every sampled key") {
  Rng rng(3);
  for (std::size_t b : {8, 16}) {
    for (int n = 0; n < 4; ++n) {
      const SeKey key = se_keygen(16, rng);
      std::set<std::uint64_t> seen;
      for (std::uint64_t m = 0; m < (1ULL << b); ++m)
        seen.insert(bits_to_uint(se_enc({b, 8}, key, uint_to_bits(m, b))));
      CHECK(seen.size() == (1ULL << b));
    }
  }
}

TEST_CASE("cipher circuit matches the cipher") {
  Rng rng(4);
  for (std::size_t b : {8, 16}) {
    const FeistelSpec spec{b, 8};
    const circuit::Circuit c = se_enc_circuit(spec, 16, 16);
    CHECK(c.inputs == 16 + b);
    CHECK(c.outputs.size() == b);
    for (int n = 0; n < 500; ++n) {
      const SeKey key = se_keygen(16, rng);
      const BitVec m = rng.bits(b);
      BitVec in = key.bits;
      in.insert(in.end(), m.begin(), m.end());
      CHECK(circuit::simulate(c, in) == se_enc(spec, key, m));
    }
    BitVec zeros(16 + b, 0);
    CHECK(circuit::simulate(c, zeros) == se_enc(spec, SeKey{BitVec(16, 0)}, BitVec(b, 0)));
    // One multiplicative level per round fits the default integer budget.
    CHECK(circuit::depth(c).multiplicative == 8);
    CHECK(circuit::depth(c).multiplicative <= he::she_params(16, 0, 8).depth_budget);
  }
  // Exhaustive over messages at the narrow width for one key.
  const FeistelSpec spec{8, 8};
  const circuit::Circuit c = se_enc_circuit(spec, 16, 16);
  const SeKey key = se_keygen(16, rng);
  for (std::uint64_t m = 0; m < 256; ++m) {
    BitVec in = key.bits;
    const BitVec mb = uint_to_bits(m, 8);
    in.insert(in.end(), mb.begin(), mb.end());
    CHECK(circuit::simulate(c, in) == se_enc(spec, key, mb));
  }
  CHECK_THROWS(se_enc_circuit({12, 8}, 16, 16));
  CHECK_THROWS(se_enc_circuit({8, 8}, 4, 16));
}

TEST_CASE("cipher avalanche") {
  Rng rng(5);
  for (std::size_t b : {8, 16}) {
    double flipped = 0;
    const int trials = 1000;
    for (int n = 0; n < trials; ++n) {
      const SeKey key = se_keygen(16, rng);
      BitVec m = rng.bits(b);
      const BitVec c0 = se_enc({b, 8}, key, m);
      m[rng.below(b)] ^= 1;
      const BitVec c1 = se_enc({b, 8}, key, m);
      for (std::size_t i = 0; i < b; ++i) flipped += c0[i] != c1[i];
    }
    CHECK(flipped / (trials * static_cast<double>(b)) >= 0.30);
  }
}

TEST_CASE("prg") {
  Rng rng(6);
  const BitVec s = rng.bits(16);
  const BitVec p16 = prg(s, 16);
  const BitVec p8 = prg(s, 8);
  CHECK(std::equal(p8.begin(), p8.end(), p16.begin()));
  CHECK(prg(s, 100) == prg(s, 100));
  for (int n = 0; n < 100; ++n) {
    const BitVec seed = rng.bits(16);
    const std::size_t i = rng.below(500);
    CHECK(bit_at(seed, i) == (prg(seed, i + 1)[i] != 0));
  }
  const BitVec long_run = prg(s, 10000);
  const double ones = std::count(long_run.begin(), long_run.end(), 1);
  CHECK(std::abs(ones / 10000 - 0.5) < 0.05);
  CHECK(prg(rng.bits(16), 64) != prg(rng.bits(16), 64));
}
