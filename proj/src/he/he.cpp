#include <cmath>

#include "backends.hpp"

namespace tabverify::he {

std::string to_string(BackendKind k) { return k == BackendKind::Transparent ? "transparent" : "integer-she"; }

BackendKind backend_from_string(const std::string& s) {
  if (s == "transparent") return BackendKind::Transparent;
  if (s == "integer-she") return BackendKind::IntegerShe;
  throw FormatError("unknown backend '" + s + "' (expected transparent or integer-she)");
}

nlohmann::json SheParams::to_json() const {
  return {{"eta", eta}, {"gamma", gamma}, {"rho", rho}, {"rho_prime", rho_prime}, {"tau", tau},
          {"depth_budget", depth_budget}};
}

double fresh_noise_bits(int rho, int rho_prime, int tau) {
  // |b + 2r + 2*sum(2 r_i)| <= 1 + 2^(rho'+1) + tau * 2^(rho+2)
  return std::log2(1.0 + std::ldexp(1.0, rho_prime + 1) + tau * std::ldexp(1.0, rho + 2));
}

double model_noise_bits(double fresh, int d) {
  double l = fresh + 4;
  for (int i = 0; i < d; ++i) l = 2 * l + 4;
  return l;
}

SheParams she_params(int K, int eta, int target_depth) {
  if (K < 8) throw BudgetError("security parameter K=" + std::to_string(K) + " is below the floor of 8");
  SheParams p;
  p.rho = K / 2;
  p.rho_prime = K;
  p.tau = K;
  const double fresh = fresh_noise_bits(p.rho, p.rho_prime, p.tau);
  if (eta <= 0) {
    if (target_depth < 1) throw BudgetError("target depth must be at least 1");
    eta = static_cast<int>(std::ceil(model_noise_bits(fresh, target_depth))) + 3 + 16;
    eta = (eta + 63) / 64 * 64;
  }
  p.eta = eta;
  p.gamma = eta + std::max(64, 4 * K);
  int d = 0;
  while (model_noise_bits(fresh, d + 1) <= eta - 3) ++d;
  if (d < 1)
    throw BudgetError("parameter set infeasible: eta=" + std::to_string(eta) + " leaves depth budget 0");
  p.depth_budget = d;
  return p;
}

std::vector<std::uint8_t> concat(const CtWord& w) {
  std::vector<std::uint8_t> out;
  for (const auto& c : w) out.insert(out.end(), c.bytes.begin(), c.bytes.end());
  return out;
}

CtWord split(std::span<const std::uint8_t> bytes, std::size_t ct_bytes) {
  if (ct_bytes == 0 || bytes.size() % ct_bytes != 0)
    throw FormatError("ciphertext block of " + std::to_string(bytes.size()) + " bytes is not a multiple of " +
                      std::to_string(ct_bytes));
  CtWord w;
  for (std::size_t i = 0; i < bytes.size(); i += ct_bytes)
    w.push_back({std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                                           bytes.begin() + static_cast<std::ptrdiff_t>(i + ct_bytes))});
  return w;
}

std::string PublicKey::fingerprint() const { return to_hex(sha256(serialize())); }

KeyPair keygen(const BackendConfig& cfg, int K, Rng& rng) {
  if (K < 8) throw BudgetError("security parameter K=" + std::to_string(K) + " is below the floor of 8");
  if (cfg.kind == BackendKind::Transparent) return detail::transparent_keygen(rng);
  return detail::integer_keygen(she_params(K, cfg.eta, cfg.target_depth), rng);
}

std::shared_ptr<const PublicKey> load_public_key(std::span<const std::uint8_t> bytes) {
  const auto p = container::read(bytes);
  if (p.kind != container::Kind::PublicKey) throw FormatError("container does not hold a public key");
  return p.backend == BackendKind::Transparent ? detail::transparent_public(p) : detail::integer_public(p);
}

std::shared_ptr<const SecretKey> load_secret_key(std::span<const std::uint8_t> bytes) {
  const auto p = container::read(bytes);
  if (p.kind != container::Kind::SecretKey) throw FormatError("container does not hold a secret key");
  return p.backend == BackendKind::Transparent ? detail::transparent_secret(p) : detail::integer_secret(p);
}

CtWord enc_word(const PublicKey& pk, std::span<const std::uint8_t> bits, Rng& rng) {
  CtWord w;
  w.reserve(bits.size());
  for (auto b : bits) w.push_back(pk.enc(b & 1u, rng));
  return w;
}

CtWord trivial_word(const PublicKey& pk, std::span<const std::uint8_t> bits) {
  CtWord w;
  w.reserve(bits.size());
  for (auto b : bits) w.push_back(pk.trivial(b & 1u));
  return w;
}

BitVec dec_word(const SecretKey& sk, const CtWord& w) {
  BitVec out;
  out.reserve(w.size());
  for (const auto& c : w) out.push_back(sk.dec(c) ? 1 : 0);
  return out;
}

Ciphertext eval(const PublicKey& pk, const circuit::Circuit& c, std::span<const Ciphertext> inputs) {
  if (c.outputs.size() != 1)
    throw Error("eval expects a single-output circuit, got " + std::to_string(c.outputs.size()) + " outputs");
  return pk.eval_all(c, inputs).front();
}

CtWord eval_star(const PublicKey& pk, const std::vector<circuit::Circuit>& fs, const CtWord& c0) {
  if (fs.empty()) return c0;
  for (std::size_t j = 0; j + 1 < fs.size(); ++j)
    if (fs[j].outputs.size() != fs[j + 1].inputs)
      throw Error("incompatible circuit sequence: stage " + std::to_string(j) + " outputs " +
                  std::to_string(fs[j].outputs.size()) + " bits, stage " + std::to_string(j + 1) + " reads " +
                  std::to_string(fs[j + 1].inputs));
  if (fs.front().inputs != c0.size())
    throw Error("eval_star: first stage reads " + std::to_string(fs.front().inputs) + " bits, got " +
                std::to_string(c0.size()));
  // Budget is checked on the composed chain so that no stage starts unless all can finish.
  circuit::Circuit chain = fs.front();
  for (std::size_t j = 1; j < fs.size(); ++j) chain = circuit::compose(chain, fs[j]);
  const BudgetReport r = pk.budget(chain, c0);
  if (!r.ok) throw BudgetError(r.reason);
  CtWord c = c0;
  for (const auto& f : fs) c = pk.eval_all(f, c);
  return c;
}

std::vector<std::uint8_t> serialize_word(const PublicKey& pk, const CtWord& w) {
  std::vector<std::vector<std::uint8_t>> fields;
  std::vector<std::uint8_t> fp = sha256(pk.serialize());
  fields.push_back(fp);
  for (const auto& c : w) fields.push_back(c.bytes);
  return container::write(pk.kind(), container::Kind::CiphertextWord, fields);
}

CtWord deserialize_word(const PublicKey& pk, std::span<const std::uint8_t> bytes) {
  const auto p = container::read(bytes);
  if (p.kind != container::Kind::CiphertextWord) throw FormatError("container does not hold ciphertexts");
  if (p.backend != pk.kind()) throw FormatError("ciphertexts belong to a different backend");
  if (p.fields.empty() || p.fields[0] != sha256(pk.serialize()))
    throw FormatError("ciphertexts were produced under a different public key");
  CtWord w;
  for (std::size_t i = 1; i < p.fields.size(); ++i) {
    Ciphertext c{p.fields[i]};
    pk.check(c);
    w.push_back(std::move(c));
  }
  return w;
}

namespace container {

std::vector<std::uint8_t> write(BackendKind backend, Kind kind, const std::vector<std::vector<std::uint8_t>>& fields) {
  std::vector<std::uint8_t> out = {'T', 'V', 'H', 'E', kVersion, static_cast<std::uint8_t>(backend),
                                   static_cast<std::uint8_t>(kind)};
  detail::put_u32(out, static_cast<std::uint32_t>(fields.size()));
  for (const auto& f : fields) {
    detail::put_u32(out, static_cast<std::uint32_t>(f.size()));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

Parsed read(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 11 || bytes[0] != 'T' || bytes[1] != 'V' || bytes[2] != 'H' || bytes[3] != 'E')
    throw FormatError("not a key or ciphertext container");
  if (bytes[4] != kVersion)
    throw FormatError("container version " + std::to_string(bytes[4]) + " is not supported");
  Parsed p;
  if (bytes[5] != 1 && bytes[5] != 2) throw FormatError("unknown backend tag " + std::to_string(bytes[5]));
  p.backend = static_cast<BackendKind>(bytes[5]);
  if (bytes[6] < 1 || bytes[6] > 3) throw FormatError("unknown container kind " + std::to_string(bytes[6]));
  p.kind = static_cast<Kind>(bytes[6]);
  const std::uint32_t n = detail::get_u32(bytes, 7);
  std::size_t pos = 11;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (pos + 4 > bytes.size()) throw FormatError("container truncated");
    const std::uint32_t len = detail::get_u32(bytes, pos);
    pos += 4;
    if (pos + len > bytes.size()) throw FormatError("container truncated");
    p.fields.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after container");
  return p;
}

}  // namespace container

namespace detail {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t pos) {
  if (pos + 4 > in.size()) throw FormatError("truncated integer field");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[pos + static_cast<std::size_t>(i)];
  return v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t pos) {
  if (pos + 8 > in.size()) throw FormatError("truncated integer field");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[pos + static_cast<std::size_t>(i)];
  return v;
}

std::vector<char> live_gates(const circuit::Circuit& c) {
  std::vector<char> need(c.wire_count(), 0);
  for (auto o : c.outputs) need.at(o) = 1;
  for (std::size_t j = c.gates.size(); j-- > 0;) {
    if (!need[c.inputs + j]) continue;
    need[c.gates[j].a] = 1;
    need[c.gates[j].b] = 1;
  }
  return need;
}

}  // namespace detail

}  // namespace tabverify::he
