#include "backends.hpp"

namespace tabverify::he::detail {

namespace {

// Ciphertext: plaintext bit byte, then a 64-bit nonce (big endian).
constexpr std::size_t kBytes = 9;

struct Wire {
  std::uint8_t bit;
  std::uint64_t nonce;
};

Wire unpack(const Ciphertext& c) { return {c.bytes[0], get_u64(c.bytes, 1)}; }

Ciphertext pack(const Wire& w) {
  Ciphertext c;
  c.bytes.reserve(kBytes);
  c.bytes.push_back(w.bit);
  put_u64(c.bytes, w.nonce);
  return c;
}

std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

class TransparentPublic final : public PublicKey {
 public:
  explicit TransparentPublic(std::uint64_t id) : id_(id) {}

  BackendKind kind() const override { return BackendKind::Transparent; }
  std::size_t ciphertext_bytes() const override { return kBytes; }
  int depth_budget() const override { return -1; }

  Ciphertext enc(bool bit, Rng& rng) const override {
    std::uint64_t n = 0;
    while (n == 0) n = rng.next();
    return pack({static_cast<std::uint8_t>(bit), n});
  }

  Ciphertext trivial(bool bit) const override { return pack({static_cast<std::uint8_t>(bit), 0}); }

  void check(const Ciphertext& c) const override {
    if (c.bytes.size() != kBytes)
      throw FormatError("ciphertext has " + std::to_string(c.bytes.size()) + " bytes, expected " +
                        std::to_string(kBytes));
    if (c.bytes[0] > 1) throw FormatError("malformed transparent ciphertext");
  }

  BudgetReport budget(const circuit::Circuit&, std::span<const Ciphertext>) const override { return {}; }

  CtWord eval_all(const circuit::Circuit& c, std::span<const Ciphertext> inputs) const override {
    if (inputs.size() != c.inputs)
      throw Error("eval: circuit reads " + std::to_string(c.inputs) + " ciphertexts, got " +
                  std::to_string(inputs.size()));
    std::vector<Wire> w(c.wire_count());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      check(inputs[i]);
      w[i] = unpack(inputs[i]);
    }
    // The nonce of a gate depends only on the key, the gate function and its
    // operand ciphertexts, so identical sub-computations give identical bytes.
    std::size_t k = c.inputs;
    for (const auto& g : c.gates) {
      const Wire& a = w[g.a];
      const Wire& b = w[g.b];
      const std::uint64_t tag = (static_cast<std::uint64_t>(g.tt) << 2) | (a.bit << 1) | b.bit;
      const std::uint64_t n = mix64(id_ ^ mix64(tag) ^ mix64(a.nonce) ^ rotl(mix64(b.nonce ^ 0x5bd1e995ULL), 23));
      w[k++] = {static_cast<std::uint8_t>(circuit::gate_output(g.tt, a.bit, b.bit)), n};
    }
    CtWord out;
    out.reserve(c.outputs.size());
    for (auto o : c.outputs) out.push_back(pack(w[o]));
    return out;
  }

  std::vector<std::uint8_t> serialize() const override {
    std::vector<std::uint8_t> f;
    put_u64(f, id_);
    return container::write(BackendKind::Transparent, container::Kind::PublicKey, {f});
  }

 private:
  std::uint64_t id_;
};

class TransparentSecret final : public SecretKey {
 public:
  explicit TransparentSecret(std::uint64_t id) : id_(id) {}
  BackendKind kind() const override { return BackendKind::Transparent; }

  bool dec(const Ciphertext& c) const override {
    if (c.bytes.size() != kBytes)
      throw FormatError("ciphertext has " + std::to_string(c.bytes.size()) + " bytes, expected " +
                        std::to_string(kBytes));
    if (c.bytes[0] > 1) throw FormatError("malformed transparent ciphertext");
    return c.bytes[0] != 0;
  }

  std::vector<std::uint8_t> serialize() const override {
    std::vector<std::uint8_t> f;
    put_u64(f, id_);
    return container::write(BackendKind::Transparent, container::Kind::SecretKey, {f});
  }

 private:
  std::uint64_t id_;
};

std::uint64_t key_id(const container::Parsed& p) {
  if (p.fields.size() != 1 || p.fields[0].size() != 8) throw FormatError("malformed transparent key");
  return get_u64(p.fields[0], 0);
}

}  // namespace

KeyPair transparent_keygen(Rng& rng) {
  const std::uint64_t id = rng.next();
  return {std::make_shared<TransparentPublic>(id), std::make_shared<TransparentSecret>(id)};
}

std::shared_ptr<const PublicKey> transparent_public(const container::Parsed& p) {
  return std::make_shared<TransparentPublic>(key_id(p));
}

std::shared_ptr<const SecretKey> transparent_secret(const container::Parsed& p) {
  return std::make_shared<TransparentSecret>(key_id(p));
}

}  // namespace tabverify::he::detail
