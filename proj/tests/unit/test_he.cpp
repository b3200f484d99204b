#include "doctest.h"
#include "tabverify/he.hpp"
#include "test_support.hpp"

using namespace tabverify;
using namespace tabverify::he;
using circuit::Builder;
using circuit::Circuit;

namespace {

const KeyPair& integer_keys() {
  static const KeyPair kp = [] {
    Rng rng(11);
    return keygen({BackendKind::IntegerShe}, 16, rng);
  }();
  return kp;
}

const KeyPair& transparent_keys() {
  static const KeyPair kp = [] {
    Rng rng(12);
    return keygen({BackendKind::Transparent}, 16, rng);
  }();
  return kp;
}

Circuit single_gate(std::uint8_t tt) {
  Circuit c;
  c.inputs = 2;
  c.gates = {{0, 1, tt}};
  c.outputs = {2};
  return c;
}

// x + 1 mod 16 on a 4-bit MSB-first word.
Circuit increment4() {
  Builder b(4);
  circuit::arith::Word x(4);
  for (std::size_t i = 0; i < 4; ++i) x[i] = b.input(3 - i);
  const auto y = circuit::arith::add(b, x, circuit::arith::constant(1, 4));
  return b.finish({y[3], y[2], y[1], y[0]});
}

}  // namespace

TEST_CASE("parameters") {
  const SheParams p = she_params(16, 0, 8);
  CHECK(p.depth_budget == 8);
  CHECK(p.eta % 64 == 0);
  CHECK(p.gamma > p.eta);
  CHECK(model_noise_bits(fresh_noise_bits(p.rho, p.rho_prime, p.tau), p.depth_budget) <= p.eta - 3);
  CHECK(model_noise_bits(fresh_noise_bits(p.rho, p.rho_prime, p.tau), p.depth_budget + 1) > p.eta - 3);
  CHECK_THROWS_AS(she_params(16, 40, 8), BudgetError);
  CHECK_THROWS_AS(she_params(4, 0, 8), BudgetError);
  Rng rng(1);
  CHECK_THROWS_AS(keygen({BackendKind::Transparent}, 0, rng), BudgetError);
  CHECK_THROWS_AS(keygen({BackendKind::IntegerShe}, 0, rng), BudgetError);
}

TEST_CASE("transparent: lengths and round trip") {
  const auto& kp = transparent_keys();
  CHECK(kp.pk->lambda() == 72);
  Rng rng(2);
  const auto a = kp.pk->enc(true, rng);
  const auto b = kp.pk->enc(true, rng);
  CHECK(a != b);
  CHECK(kp.sk->dec(a));
  CHECK_FALSE(kp.sk->dec(kp.pk->enc(false, rng)));
  CHECK_THROWS_AS(kp.sk->dec(Ciphertext{{1, 2}}), FormatError);
  const BitVec word = bits_from_string("0000000100101110");
  const CtWord w = enc_word(*kp.pk, word, rng);
  CHECK(w.size() == 16);
  for (const auto& c : w) CHECK(c.bytes.size() * 8 == kp.pk->lambda());
  CHECK(dec_word(*kp.sk, w) == word);
}

TEST_CASE("integer-she: round trip over 1000 bits") {
  const auto& kp = integer_keys();
  Rng rng(3);
  int wrong = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool b = rng.bit();
    wrong += kp.sk->dec(kp.pk->enc(b, rng)) != b;
  }
  CHECK(wrong == 0);
  const auto a = kp.pk->enc(true, rng);
  CHECK(a != kp.pk->enc(true, rng));
  CHECK(a.bytes.size() == kp.pk->ciphertext_bytes());
  Ciphertext cut = a;
  cut.bytes.pop_back();
  CHECK_THROWS_AS(kp.sk->dec(cut), FormatError);
  CHECK(kp.sk->dec(kp.pk->trivial(true)));
  CHECK_FALSE(kp.sk->dec(kp.pk->trivial(false)));
}

TEST_CASE("gates on both backends") {
  for (const KeyPair* kp : {&transparent_keys(), &integer_keys()}) {
    Rng rng(4);
    for (std::uint8_t tt = 0; tt < 16; ++tt) {
      const Circuit c = single_gate(tt);
      for (int x = 0; x < 4; ++x) {
        const CtWord in = {kp->pk->enc(x >> 1, rng), kp->pk->enc(x & 1, rng)};
        const Ciphertext out = eval(*kp->pk, c, in);
        CHECK(out.bytes.size() == kp->pk->ciphertext_bytes());
        CHECK(kp->sk->dec(out) == circuit::gate_output(tt, x >> 1, x & 1));
      }
    }
    const CtWord ones = {kp->pk->enc(true, rng), kp->pk->enc(true, rng)};
    CHECK_FALSE(kp->sk->dec(eval(*kp->pk, single_gate(0b0110), ones)));
  }
}

TEST_CASE("random circuits decrypt to simulation") {
  Rng rng(5);
  for (const KeyPair* kp : {&transparent_keys(), &integer_keys()}) {
    int evaluated = 0;
    for (int n = 0; n < 60; ++n) {
      const Circuit c = testing::random_circuit(rng, 2 + rng.below(6), 5 + rng.below(20), 1 + rng.below(3));
      const BitVec x = rng.bits(c.inputs);
      const CtWord in = enc_word(*kp->pk, x, rng);
      if (!kp->pk->budget(c, in).ok) {
        CHECK_THROWS_AS(kp->pk->eval_all(c, in), BudgetError);
        continue;
      }
      const CtWord out = kp->pk->eval_all(c, in);
      CHECK(dec_word(*kp->sk, out) == circuit::simulate(c, x));
      CHECK(kp->pk->eval_all(c, in) == out);  // deterministic
      ++evaluated;
    }
    CHECK(evaluated > 30);
  }
}

TEST_CASE("integer-she: depth budget is enforced") {
  const auto& kp = integer_keys();
  const int d = kp.pk->depth_budget();
  Rng rng(6);
  for (int depth : {d, d + 1}) {
    Builder b(static_cast<std::size_t>(depth + 1));
    auto w = b.input(0);
    for (int i = 1; i <= depth; ++i) w = b.and_(w, b.input(static_cast<std::size_t>(i)));
    const Circuit c = b.finish({w});
    CHECK(circuit::depth(c).multiplicative == depth);
    BitVec ones(static_cast<std::size_t>(depth + 1), 1);
    const CtWord in = enc_word(*kp.pk, ones, rng);
    if (depth == d) {
      CHECK(kp.sk->dec(eval(*kp.pk, c, in)));
    } else {
      try {
        eval(*kp.pk, c, in);
        FAIL("expected a budget error");
      } catch (const BudgetError& e) {
        CHECK(std::string(e.what()).find("depth budget exceeded") != std::string::npos);
      }
    }
  }
}

TEST_CASE("projection evaluation matches full evaluation byte for byte") {
  const auto& kp = transparent_keys();
  Rng rng(7);
  const Circuit c = testing::random_circuit(rng, 6, 40, 5);
  const CtWord in = enc_word(*kp.pk, rng.bits(6), rng);
  const CtWord all = kp.pk->eval_all(c, in);
  for (std::size_t k = 0; k < c.outputs.size(); ++k) {
    const Circuit p = circuit::cone(c, std::span<const std::uint32_t>(&c.outputs[k], 1));
    CHECK(eval(*kp.pk, p, in) == all[k]);
  }
}

TEST_CASE("eval_star") {
  const Circuit inc = increment4();
  for (const KeyPair* kp : {&transparent_keys(), &integer_keys()}) {
    Rng rng(8);
    const CtWord c0 = enc_word(*kp->pk, uint_to_bits(3, 4), rng);
    CHECK(bits_to_uint(dec_word(*kp->sk, eval_star(*kp->pk, {inc, inc}, c0))) == 5);
    Builder b(4);
    const Circuit id = b.finish({b.input(0), b.input(1), b.input(2), b.input(3)});
    CHECK(bits_to_uint(dec_word(*kp->sk, eval_star(*kp->pk, {id, id}, c0))) == 3);
    CHECK_THROWS(eval_star(*kp->pk, {inc, single_gate(0b1000)}, c0));
  }
  // Multi-hop holds only within the depth budget.
  const auto& kp = integer_keys();
  Rng rng(9);
  const CtWord c0 = enc_word(*kp.pk, uint_to_bits(0, 4), rng);
  // Each stage adds one multiplicative level; chained increments would not.
  Builder b(4);
  const Circuit rot = b.finish({b.and_(b.input(0), b.input(1)), b.and_(b.input(1), b.input(2)),
                                b.and_(b.input(2), b.input(3)), b.and_(b.input(3), b.input(0))});
  std::vector<Circuit> ok(static_cast<std::size_t>(kp.pk->depth_budget()), rot);
  CHECK(eval_star(*kp.pk, ok, enc_word(*kp.pk, BitVec{1, 1, 1, 1}, rng)).size() == 4);
  std::vector<Circuit> many(static_cast<std::size_t>(kp.pk->depth_budget() + 1), rot);
  CHECK_THROWS_AS(eval_star(*kp.pk, many, c0), BudgetError);
}

TEST_CASE("backends agree") {
  Rng rng(10);
  for (int n = 0; n < 20; ++n) {
    const Circuit c = testing::random_circuit(rng, 4, 12, 2);
    const BitVec x = rng.bits(4);
    const CtWord ti = enc_word(*transparent_keys().pk, x, rng);
    const CtWord ii = enc_word(*integer_keys().pk, x, rng);
    if (!integer_keys().pk->budget(c, ii).ok) continue;
    CHECK(dec_word(*transparent_keys().sk, transparent_keys().pk->eval_all(c, ti)) ==
          dec_word(*integer_keys().sk, integer_keys().pk->eval_all(c, ii)));
  }
}

TEST_CASE("integer-she: linear distinguisher has no advantage") {
  const auto& kp = integer_keys();
  Rng rng(13);
  int guess_one[2] = {0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const bool m = i % 2;
    const auto c = kp.pk->enc(m, rng);
    // Parity of the low byte of the residue.
    const std::uint8_t low = c.bytes.back();
    guess_one[m] += __builtin_parity(low);
  }
  const double adv = std::abs(guess_one[1] / (n / 2.0) - guess_one[0] / (n / 2.0));
  CHECK(adv < 0.1);
}

TEST_CASE("key and ciphertext containers") {
  for (const KeyPair* kp : {&transparent_keys(), &integer_keys()}) {
    const auto pk = load_public_key(kp->pk->serialize());
    const auto sk = load_secret_key(kp->sk->serialize());
    CHECK(pk->serialize() == kp->pk->serialize());
    CHECK(sk->serialize() == kp->sk->serialize());
    CHECK(pk->fingerprint() == kp->pk->fingerprint());
    Rng rng(14);
    const BitVec bits = rng.bits(8);
    const CtWord w = enc_word(*pk, bits, rng);
    const auto blob = serialize_word(*pk, w);
    CHECK(deserialize_word(*kp->pk, blob) == w);
    CHECK(dec_word(*sk, w) == bits);
    CHECK_THROWS_AS(load_secret_key(kp->pk->serialize()), FormatError);
    auto bad = kp->pk->serialize();
    bad[4] = 9;
    CHECK_THROWS_AS(load_public_key(bad), FormatError);
    bad = kp->pk->serialize();
    bad.pop_back();
    CHECK_THROWS_AS(load_public_key(bad), FormatError);
  }
  Rng rng(15);
  const auto other = keygen({BackendKind::Transparent}, 16, rng);
  const auto blob = serialize_word(*transparent_keys().pk, enc_word(*transparent_keys().pk, BitVec{1, 0}, rng));
  CHECK_THROWS_AS(deserialize_word(*other.pk, blob), FormatError);
}
