#include "tabverify/symcrypto.hpp"

namespace tabverify::symcrypto {

namespace {

struct Rotations {
  std::size_t and_a, and_b, x;
};

// Simon-style amounts, scaled down for narrow halves.
Rotations rotations(std::size_t w) {
  if (w >= 16) return {1, 8, 2};
  return {1 % w, (w / 2 + 1) % w, 2 % w};
}

std::uint64_t round_constant(int r) { return mix64(0x7461627665726966ULL + static_cast<std::uint64_t>(r)); }

// Bit i of a w-bit half is stored at position w-1-i (MSB first).
std::uint64_t rotl(std::uint64_t x, std::size_t s, std::size_t w) {
  const std::uint64_t mask = w == 64 ? ~0ULL : ((1ULL << w) - 1);
  if (s == 0) return x & mask;
  return ((x << s) | (x >> (w - s))) & mask;
}

std::uint64_t round_key(const SeKey& key, int r, std::size_t w) {
  const std::size_t K = key.bits.size();
  const std::uint64_t c = round_constant(r);
  std::uint64_t k = 0;
  // MSB-first position i takes key bit i+5r and constant bit i.
  for (std::size_t i = 0; i < w; ++i) {
    const std::uint64_t bit = key.bits[(i + 5 * static_cast<std::size_t>(r)) % K] ^ ((c >> i) & 1u);
    k = (k << 1) | bit;
  }
  return k;
}

std::uint64_t f(std::uint64_t x, std::size_t w) {
  const Rotations rot = rotations(w);
  return (rotl(x, rot.and_a, w) & rotl(x, rot.and_b, w)) ^ rotl(x, rot.x, w);
}

void check_key(const SeKey& key) {
  if (key.bits.size() < 8) throw Error("cipher key must have at least 8 bits");
}

}  // namespace

SeKey se_keygen(std::size_t K, Rng& rng) {
  if (K < 8) throw BudgetError("cipher key length K=" + std::to_string(K) + " is below the floor of 8");
  return {rng.bits(K)};
}

void FeistelSpec::check() const {
  if (block_bits < 4 || block_bits > 64 || block_bits % 2 != 0)
    throw Error("cipher block width must be even and within 4..64, got " + std::to_string(block_bits));
  if (rounds < 1) throw Error("cipher needs at least one round");
}

nlohmann::json FeistelSpec::to_json() const { return {{"block_bits", block_bits}, {"rounds", rounds}}; }

FeistelSpec FeistelSpec::from_json(const nlohmann::json& j) {
  FeistelSpec s;
  try {
    s.block_bits = j.at("block_bits").get<std::size_t>();
    s.rounds = j.at("rounds").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed cipher spec: ") + e.what());
  }
  s.check();
  return s;
}

BitVec se_enc(const FeistelSpec& spec, const SeKey& key, std::span<const std::uint8_t> block) {
  spec.check();
  check_key(key);
  if (block.size() != spec.block_bits)
    throw Error("cipher width mismatch: expected " + std::to_string(spec.block_bits) + " bits, got " +
                std::to_string(block.size()));
  const std::size_t w = spec.block_bits / 2;
  std::uint64_t l = bits_to_uint(block.subspan(0, w));
  std::uint64_t r = bits_to_uint(block.subspan(w));
  for (int i = 0; i < spec.rounds; ++i) {
    const std::uint64_t nl = r ^ f(l, w) ^ round_key(key, i, w);
    r = l;
    l = nl;
  }
  BitVec out = uint_to_bits(l, w);
  const BitVec lo = uint_to_bits(r, w);
  out.insert(out.end(), lo.begin(), lo.end());
  return out;
}

BitVec se_dec(const FeistelSpec& spec, const SeKey& key, std::span<const std::uint8_t> block) {
  spec.check();
  check_key(key);
  if (block.size() != spec.block_bits)
    throw Error("cipher width mismatch: expected " + std::to_string(spec.block_bits) + " bits, got " +
                std::to_string(block.size()));
  const std::size_t w = spec.block_bits / 2;
  std::uint64_t l = bits_to_uint(block.subspan(0, w));
  std::uint64_t r = bits_to_uint(block.subspan(w));
  for (int i = spec.rounds; i-- > 0;) {
    const std::uint64_t pl = r;
    r = l ^ f(pl, w) ^ round_key(key, i, w);
    l = pl;
  }
  BitVec out = uint_to_bits(l, w);
  const BitVec lo = uint_to_bits(r, w);
  out.insert(out.end(), lo.begin(), lo.end());
  return out;
}

circuit::Circuit se_enc_circuit(const FeistelSpec& spec, std::size_t key_bits, std::size_t word_bits) {
  spec.check();
  if (key_bits < 8) throw Error("cipher key must have at least 8 bits");
  if (spec.block_bits != word_bits && 2 * spec.block_bits != word_bits)
    throw Error("unsupported cipher circuit width " + std::to_string(spec.block_bits) + " for " +
                std::to_string(word_bits) + "-bit words");
  using circuit::Builder;
  using Half = std::vector<Builder::Wire>;  // MSB first
  const std::size_t w = spec.block_bits / 2;
  Builder b(key_bits + spec.block_bits);
  Half l(w), r(w);
  for (std::size_t i = 0; i < w; ++i) {
    l[i] = b.input(key_bits + i);
    r[i] = b.input(key_bits + w + i);
  }
  // Left rotation of an MSB-first vector moves position i+s to i.
  const auto rot = [w](const Half& x, std::size_t s) {
    Half y(w);
    for (std::size_t i = 0; i < w; ++i) y[i] = x[(i + s) % w];
    return y;
  };
  const Rotations amounts = rotations(w);
  for (int round = 0; round < spec.rounds; ++round) {
    const std::uint64_t c = round_constant(round);
    const Half a = rot(l, amounts.and_a), bb = rot(l, amounts.and_b), x = rot(l, amounts.x);
    Half nl(w);
    for (std::size_t i = 0; i < w; ++i) {
      Builder::Wire k = b.input((i + 5 * static_cast<std::size_t>(round)) % key_bits);
      if ((c >> i) & 1u) k = b.not_(k);
      nl[i] = b.xor_(b.xor_(r[i], b.and_(a[i], bb[i])), b.xor_(x[i], k));
    }
    r = l;
    l = nl;
  }
  std::vector<Builder::Wire> out = l;
  out.insert(out.end(), r.begin(), r.end());
  return b.finish(out);
}

namespace {

const FeistelSpec& prg_spec() {
  static const FeistelSpec s{32, 8};
  return s;
}

}  // namespace

BitVec prg(std::span<const std::uint8_t> seed, std::size_t n) {
  const SeKey key{BitVec(seed.begin(), seed.end())};
  BitVec out;
  out.reserve(n + 32);
  for (std::uint64_t j = 0; out.size() < n; ++j) {
    const BitVec block = se_enc(prg_spec(), key, uint_to_bits(j, 32));
    out.insert(out.end(), block.begin(), block.end());
  }
  out.resize(n);
  return out;
}

bool bit_at(std::span<const std::uint8_t> seed, std::size_t i) {
  const SeKey key{BitVec(seed.begin(), seed.end())};
  return se_enc(prg_spec(), key, uint_to_bits(i / 32, 32))[i % 32] != 0;
}

}  // namespace tabverify::symcrypto
