#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "backends.hpp"

namespace tabverify::he::detail {

namespace {

// Ciphertext: level (u16), noise bound in 1/1024 bits (u32), then the residue
// modulo x0 as a fixed-width big-endian integer.
constexpr std::size_t kHeader = 6;
constexpr double kNoiseScale = 1024.0;

std::vector<std::uint8_t> to_bytes(const mpz_class& v, std::size_t width) {
  std::vector<std::uint8_t> out(width, 0);
  std::size_t count = 0;
  std::vector<std::uint8_t> tmp((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8 + 1);
  mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  if (count > width) throw Error("integer does not fit its serialized width");
  std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(count),
            out.begin() + static_cast<std::ptrdiff_t>(width - count));
  return out;
}

mpz_class from_bytes(std::span<const std::uint8_t> bytes) {
  mpz_class v;
  if (!bytes.empty()) mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

mpz_class random_bits(Rng& rng, int bits) {
  auto bytes = rng.bytes(static_cast<std::size_t>((bits + 7) / 8));
  const int excess = static_cast<int>(bytes.size()) * 8 - bits;
  if (!bytes.empty()) bytes[0] &= static_cast<std::uint8_t>(0xFFu >> excess);
  return from_bytes(bytes);
}

// Uniform in (-2^bits, 2^bits).
mpz_class random_signed(Rng& rng, int bits) {
  mpz_class v = random_bits(rng, bits);
  return rng.bit() ? mpz_class(-v) : v;
}

std::vector<std::uint8_t> params_field(const SheParams& p) {
  std::vector<std::uint8_t> f;
  for (int v : {p.eta, p.gamma, p.rho, p.rho_prime, p.tau, p.depth_budget}) put_u32(f, static_cast<std::uint32_t>(v));
  return f;
}

SheParams parse_params(const std::vector<std::uint8_t>& f) {
  if (f.size() != 24) throw FormatError("malformed integer-she parameter field");
  SheParams p;
  p.eta = static_cast<int>(get_u32(f, 0));
  p.gamma = static_cast<int>(get_u32(f, 4));
  p.rho = static_cast<int>(get_u32(f, 8));
  p.rho_prime = static_cast<int>(get_u32(f, 12));
  p.tau = static_cast<int>(get_u32(f, 16));
  p.depth_budget = static_cast<int>(get_u32(f, 20));
  if (p.eta < 8 || p.gamma <= p.eta || p.gamma > (1 << 20) || p.tau < 1 || p.tau > 4096)
    throw FormatError("integer-she parameters out of range");
  return p;
}

std::size_t value_bytes(const SheParams& p) { return static_cast<std::size_t>((p.gamma + 7) / 8); }

struct Decoded {
  int level;
  double noise;
  mpz_class value;
};

Decoded decode(const Ciphertext& c, const SheParams& p) {
  if (c.bytes.size() != kHeader + value_bytes(p))
    throw FormatError("ciphertext has " + std::to_string(c.bytes.size()) + " bytes, expected " +
                      std::to_string(kHeader + value_bytes(p)));
  Decoded d;
  d.level = (c.bytes[0] << 8) | c.bytes[1];
  d.noise = get_u32(c.bytes, 2) / kNoiseScale;
  d.value = from_bytes(std::span<const std::uint8_t>(c.bytes).subspan(kHeader));
  return d;
}

Ciphertext encode(int level, double noise, const mpz_class& v, const SheParams& p) {
  Ciphertext c;
  c.bytes.reserve(kHeader + value_bytes(p));
  c.bytes.push_back(static_cast<std::uint8_t>(level >> 8));
  c.bytes.push_back(static_cast<std::uint8_t>(level));
  const double scaled = std::ceil(std::max(0.0, noise) * kNoiseScale);
  put_u32(c.bytes, static_cast<std::uint32_t>(std::min(scaled, 4294967295.0)));
  const auto body = to_bytes(v, value_bytes(p));
  c.bytes.insert(c.bytes.end(), body.begin(), body.end());
  return c;
}

// log2(sum of 2^x) over the listed terms; -inf for no terms.
double log2_sum(std::initializer_list<double> terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double t : terms) s += std::exp2(t - m);
  return m + std::log2(s);
}

struct Coeffs {
  bool c0, c1, c2, c3;
};

Coeffs anf(std::uint8_t tt) {
  const bool f00 = circuit::gate_output(tt, false, false);
  const bool f01 = circuit::gate_output(tt, false, true);
  const bool f10 = circuit::gate_output(tt, true, false);
  const bool f11 = circuit::gate_output(tt, true, true);
  return {f00, f00 != f10, f00 != f01, (f00 ^ f01 ^ f10 ^ f11) != 0};
}

class IntegerPublic final : public PublicKey {
 public:
  IntegerPublic(SheParams p, mpz_class x0, std::vector<mpz_class> xs)
      : p_(p), x0_(std::move(x0)), xs_(std::move(xs)) {}

  BackendKind kind() const override { return BackendKind::IntegerShe; }
  std::size_t ciphertext_bytes() const override { return kHeader + value_bytes(p_); }
  int depth_budget() const override { return p_.depth_budget; }
  const SheParams& params() const { return p_; }

  Ciphertext enc(bool bit, Rng& rng) const override {
    mpz_class c = mpz_class(bit ? 1 : 0) + 2 * random_signed(rng, p_.rho_prime);
    mpz_class sum = 0;
    for (const auto& x : xs_)
      if (rng.bit()) sum += x;
    c += 2 * sum;
    mpz_fdiv_r(c.get_mpz_t(), c.get_mpz_t(), x0_.get_mpz_t());
    return encode(0, fresh_noise_bits(p_.rho, p_.rho_prime, p_.tau), c, p_);
  }

  Ciphertext trivial(bool bit) const override { return encode(0, 0, mpz_class(bit ? 1 : 0), p_); }

  void check(const Ciphertext& c) const override {
    const Decoded d = decode(c, p_);
    if (d.value >= x0_) throw FormatError("ciphertext is not reduced modulo the public modulus");
    if (d.level > p_.depth_budget) throw FormatError("ciphertext level exceeds the depth budget");
  }

  BudgetReport budget(const circuit::Circuit& c, std::span<const Ciphertext> inputs) const override {
    std::vector<int> level;
    std::vector<double> noise;
    return analyse(c, inputs, level, noise);
  }

  CtWord eval_all(const circuit::Circuit& c, std::span<const Ciphertext> inputs) const override {
    std::vector<int> level;
    std::vector<double> noise;
    const BudgetReport r = analyse(c, inputs, level, noise);
    if (!r.ok) throw BudgetError(r.reason);
    const auto live = live_gates(c);
    std::vector<mpz_class> v(c.wire_count());
    for (std::size_t i = 0; i < c.inputs; ++i)
      if (live[i]) v[i] = decode(inputs[i], p_).value;
    mpz_class t;
    for (std::size_t j = 0; j < c.gates.size(); ++j) {
      const std::size_t k = c.inputs + j;
      if (!live[k]) continue;
      const auto& g = c.gates[j];
      const Coeffs cf = anf(g.tt);
      mpz_class acc = cf.c0 ? 1 : 0;
      if (cf.c1) acc += v[g.a];
      if (cf.c2) acc += v[g.b];
      if (cf.c3) {
        mpz_mul(t.get_mpz_t(), v[g.a].get_mpz_t(), v[g.b].get_mpz_t());
        acc += t;
      }
      mpz_fdiv_r(acc.get_mpz_t(), acc.get_mpz_t(), x0_.get_mpz_t());
      v[k] = std::move(acc);
    }
    CtWord out;
    out.reserve(c.outputs.size());
    for (auto o : c.outputs) out.push_back(encode(level[o], noise[o], v[o], p_));
    return out;
  }

  std::vector<std::uint8_t> serialize() const override {
    std::vector<std::vector<std::uint8_t>> f;
    f.push_back(params_field(p_));
    f.push_back(to_bytes(x0_, value_bytes(p_)));
    for (const auto& x : xs_) f.push_back(to_bytes(x, value_bytes(p_)));
    return container::write(BackendKind::IntegerShe, container::Kind::PublicKey, f);
  }

 private:
  BudgetReport analyse(const circuit::Circuit& c, std::span<const Ciphertext> inputs, std::vector<int>& level,
                       std::vector<double>& noise) const {
    if (inputs.size() != c.inputs)
      throw Error("eval: circuit reads " + std::to_string(c.inputs) + " ciphertexts, got " +
                  std::to_string(inputs.size()));
    const auto live = live_gates(c);
    level.assign(c.wire_count(), 0);
    noise.assign(c.wire_count(), 0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      check(inputs[i]);
      const Ciphertext& ct = inputs[i];
      level[i] = (ct.bytes[0] << 8) | ct.bytes[1];
      noise[i] = get_u32(ct.bytes, 2) / kNoiseScale;
    }
    BudgetReport r;
    const double limit = p_.eta - 3;
    for (std::size_t j = 0; j < c.gates.size(); ++j) {
      const std::size_t k = c.inputs + j;
      if (!live[k]) continue;
      const auto& g = c.gates[j];
      const Coeffs cf = anf(g.tt);
      const double na = noise[g.a];
      const double nb = noise[g.b];
      const double inf = -std::numeric_limits<double>::infinity();
      double n = log2_sum({cf.c0 ? 0.0 : inf, cf.c1 ? na : inf, cf.c2 ? nb : inf, cf.c3 ? na + nb : inf});
      if (!std::isfinite(n)) n = 0;
      int lv = 0;
      if (cf.c1 || cf.c3) lv = std::max(lv, level[g.a]);
      if (cf.c2 || cf.c3) lv = std::max(lv, level[g.b]);
      if (cf.c3) ++lv;
      // Values stored in headers are rounded up; track the same quantity.
      noise[k] = std::ceil(n * kNoiseScale) / kNoiseScale;
      level[k] = lv;
      r.level = std::max(r.level, lv);
      r.noise_bits = std::max(r.noise_bits, noise[k]);
      if (r.ok && lv > p_.depth_budget) {
        r.ok = false;
        r.reason = "depth budget exceeded: gate " + std::to_string(j) + " needs multiplicative level " +
                   std::to_string(lv) + ", budget is " + std::to_string(p_.depth_budget);
      }
      if (r.ok && noise[k] > limit) {
        r.ok = false;
        r.reason = "noise budget exceeded: gate " + std::to_string(j) + " reaches " + std::to_string(noise[k]) +
                   " noise bits, limit is " + std::to_string(limit);
      }
    }
    return r;
  }

  SheParams p_;
  mpz_class x0_;
  std::vector<mpz_class> xs_;
};

class IntegerSecret final : public SecretKey {
 public:
  IntegerSecret(SheParams params, mpz_class p) : params_(params), p_(std::move(p)), half_(p_ / 2) {}
  BackendKind kind() const override { return BackendKind::IntegerShe; }

  bool dec(const Ciphertext& c) const override {
    const Decoded d = decode(c, params_);
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), d.value.get_mpz_t(), p_.get_mpz_t());
    if (r > half_) r -= p_;
    return mpz_odd_p(r.get_mpz_t()) != 0;
  }

  std::vector<std::uint8_t> serialize() const override {
    return container::write(BackendKind::IntegerShe, container::Kind::SecretKey,
                            {params_field(params_), to_bytes(p_, value_bytes(params_))});
  }

 private:
  SheParams params_;
  mpz_class p_;
  mpz_class half_;
};

}  // namespace

KeyPair integer_keygen(const SheParams& params, Rng& rng) {
  // p: odd with its top bit set.
  mpz_class p = random_bits(rng, params.eta - 1);
  mpz_setbit(p.get_mpz_t(), static_cast<mp_bitcnt_t>(params.eta - 1));
  mpz_setbit(p.get_mpz_t(), 0);
  const int qbits = params.gamma - params.eta;
  mpz_class q0 = random_bits(rng, qbits - 1);
  mpz_setbit(q0.get_mpz_t(), static_cast<mp_bitcnt_t>(qbits - 1));
  mpz_setbit(q0.get_mpz_t(), 0);
  const mpz_class x0 = p * q0;  // exact multiple of p
  std::vector<mpz_class> xs;
  for (int i = 0; i < params.tau; ++i) {
    mpz_class q = random_bits(rng, qbits);
    mpz_class x = p * q + 2 * random_signed(rng, params.rho);
    mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), x0.get_mpz_t());
    xs.push_back(std::move(x));
  }
  return {std::make_shared<IntegerPublic>(params, x0, std::move(xs)), std::make_shared<IntegerSecret>(params, p)};
}

std::shared_ptr<const PublicKey> integer_public(const container::Parsed& c) {
  if (c.fields.size() < 2) throw FormatError("malformed integer-she public key");
  const SheParams p = parse_params(c.fields[0]);
  if (c.fields.size() != static_cast<std::size_t>(p.tau) + 2) throw FormatError("integer-she public key element count");
  for (std::size_t i = 1; i < c.fields.size(); ++i)
    if (c.fields[i].size() != value_bytes(p)) throw FormatError("integer-she public key element width");
  mpz_class x0 = from_bytes(c.fields[1]);
  std::vector<mpz_class> xs;
  for (std::size_t i = 2; i < c.fields.size(); ++i) xs.push_back(from_bytes(c.fields[i]));
  return std::make_shared<IntegerPublic>(p, std::move(x0), std::move(xs));
}

std::shared_ptr<const SecretKey> integer_secret(const container::Parsed& c) {
  if (c.fields.size() != 2) throw FormatError("malformed integer-she secret key");
  const SheParams p = parse_params(c.fields[0]);
  if (c.fields[1].size() != value_bytes(p)) throw FormatError("integer-she secret key width");
  return std::make_shared<IntegerSecret>(p, from_bytes(c.fields[1]));
}

}  // namespace tabverify::he::detail
