#include <cmath>

#include "doctest.h"
#include "tabverify/commitment.hpp"
#include "tabverify/symcrypto.hpp"

using namespace tabverify;
using namespace tabverify::commitment;

namespace {

const CodeSpec& code() {
  static const CodeSpec c = default_code();
  return c;
}

// Independent oracle: minimum pairwise distance over all 2^m_c codewords.
std::size_t pairwise_distance(const CodeSpec& c) {
  std::vector<BitVec> words;
  for (std::uint64_t m = 0; m < (1ULL << c.message_bits); ++m) words.push_back(c.encode(uint_to_bits(m, c.message_bits)));
  std::size_t best = c.length;
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      std::size_t d = 0;
      for (std::size_t k = 0; k < c.length; ++k) d += words[i][k] != words[j][k];
      best = std::min(best, d);
    }
  return best;
}

}  // namespace

TEST_CASE("code generation") {
  const CodeSpec& c = code();
  // 3 * 16 / log2(2 / 1.75) = 249.04..., rounded up to a multiple of 4.
  CHECK(min_code_length(0.25, 16) == 250);
  CHECK(c.length == 252);
  CHECK(c.ratio() == 63);
  CHECK(c.length * std::log2(2.0 / 1.75) >= 48);
  CHECK(pairwise_distance(c) == c.min_distance);
  CHECK(c.min_distance >= 63);
  const CodeSpec rep = gen_code(1, 0.25, 16, 3);
  CHECK(rep.min_distance == rep.length);
  CHECK(pairwise_distance(rep) == rep.length);
  CHECK_THROWS_AS(gen_code(2, 1.0, 16, 3), BudgetError);
  CHECK_THROWS_AS(gen_code(17, 0.25, 16, 3), BudgetError);
  CHECK(CodeSpec::from_json(c.to_json()) == c);
  auto j = c.to_json();
  j["min_distance"] = c.min_distance + 1;
  CHECK_THROWS_AS(CodeSpec::from_json(j), FormatError);
}

TEST_CASE("challenge") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const BitVec r = choose_challenge(252, rng);
    CHECK(r.size() == 504);
    CHECK(std::count(r.begin(), r.end(), 1) == 252);
  }
  int first = 0;
  for (int i = 0; i < 100; ++i) {
    const BitVec r = choose_challenge(1, rng);
    CHECK((r == BitVec{0, 1} || r == BitVec{1, 0}));
    first += r[0];
  }
  CHECK(first > 0);
  CHECK(first < 100);
}

TEST_CASE("commit and reveal") {
  Rng rng(2);
  const CodeSpec& c = code();
  const BitVec r = choose_challenge(c.length, rng);
  const BitVec s = rng.bits(16);
  const BitVec zero(4, 0);
  const CommitMessage m = commit_respond(zero, r, s, c);
  CHECK(m.exposed.size() == c.length);
  // e = G_R(s) xor E(0) = G_R(s).
  const BitVec stream = symcrypto::prg(s, r.size());
  BitVec g;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i]) g.push_back(stream[i]);
  CHECK(m.e == g);
  CHECK(verify_reveal(m, {s, zero}, r, c));
  CommitMessage bad = m;
  bad.exposed[7].bit ^= 1;
  CHECK_FALSE(verify_reveal(bad, {s, zero}, r, c));
  CHECK_THROWS(commit_respond(zero, BitVec(2 * c.length, 1), s, c));
  CHECK_THROWS(commit_respond(BitVec(3, 0), r, s, c));
  int rejected = 0;
  for (int n = 0; n < 1000; ++n) {
    const BitVec rr = choose_challenge(c.length, rng);
    const BitVec ss = rng.bits(16);
    const BitVec d = rng.bits(4);
    const CommitMessage mm = commit_respond(d, rr, ss, c);
    REQUIRE(verify_reveal(mm, {ss, d}, rr, c));
    BitVec other = d;
    other[rng.below(4)] ^= 1;
    rejected += !verify_reveal(mm, {ss, other}, rr, c);
  }
  CHECK(rejected == 1000);
}

TEST_CASE("binding against seed search") {
  Rng rng(3);
  const CodeSpec& c = code();
  int accepted = 0;
  const int trials = 1000;
  for (int n = 0; n < trials; ++n) {
    const BitVec r = choose_challenge(c.length, rng);
    const BitVec s = rng.bits(16);
    const BitVec d = rng.bits(4);
    const CommitMessage m = commit_respond(d, r, s, c);
    // Every alternative message under the true seed, then random seeds.
    for (std::uint64_t alt = 0; alt < 16; ++alt) {
      const BitVec d2 = uint_to_bits(alt, 4);
      if (d2 != d) accepted += verify_reveal(m, {s, d2}, r, c);
    }
    for (int k = 0; k < 32; ++k) {
      BitVec d2 = d;
      d2[rng.below(4)] ^= 1;
      accepted += verify_reveal(m, {rng.bits(16), d2}, r, c);
    }
  }
  CHECK(static_cast<double>(accepted) / trials <= 1.0 / 1024);
}

TEST_CASE("hiding smoke test") {
  Rng rng(4);
  const CodeSpec& c = code();
  const BitVec d0(4, 0), d1(4, 1);
  int guess[2] = {0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const int b = i % 2;
    const BitVec r = choose_challenge(c.length, rng);
    const CommitMessage m = commit_respond(b ? d1 : d0, r, rng.bits(16), c);
    // Majority of e.
    guess[b] += std::count(m.e.begin(), m.e.end(), 1) * 2 > static_cast<std::ptrdiff_t>(m.e.size());
  }
  CHECK(std::abs(guess[1] - guess[0]) / (n / 2.0) < 0.1);
}

TEST_CASE("multi-block transcript") {
  Rng rng(5);
  const CodeSpec& c = code();
  const BitVec data = rng.bits(10);
  Transcript t;
  t.data_bits = data.size();
  for (std::size_t b = 0; b < block_count(data.size(), c); ++b) {
    BitVec block(4, 0);
    for (std::size_t i = 0; i < 4 && 4 * b + i < data.size(); ++i) block[i] = data[4 * b + i];
    BlockTranscript bt;
    bt.challenge = choose_challenge(c.length, rng);
    Committer committer(c);
    bt.commit = committer.commit(block, bt.challenge, rng);
    bt.reveal = committer.reveal();
    t.blocks.push_back(bt);
  }
  CHECK(t.blocks.size() == 3);
  BitVec opened;
  CHECK(t.verify(c, &opened));
  CHECK(opened == data);
  const Transcript back = Transcript::from_json(t.to_json());
  CHECK(back == t);
  Transcript bad = t;
  bad.blocks[1].reveal.data[0] ^= 1;
  CHECK_FALSE(bad.verify(c));
  bad = t;
  bad.blocks.pop_back();
  CHECK_FALSE(bad.verify(c));
}
