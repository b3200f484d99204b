#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/circuit.hpp"
#include "tabverify/common.hpp"

namespace tabverify::he {

enum class BackendKind : std::uint8_t { Transparent = 1, IntegerShe = 2 };

std::string to_string(BackendKind k);
BackendKind backend_from_string(const std::string& s);

// Integer somewhat-homomorphic parameters (all lengths in bits).
struct SheParams {
  int eta = 0;          // secret modulus p
  int gamma = 0;        // public modulus x0 = p*q0
  int rho = 0;          // noise of the public encryptions of zero
  int rho_prime = 0;    // extra noise added at encryption
  int tau = 0;          // number of public encryptions of zero
  int depth_budget = 0;  // D

  nlohmann::json to_json() const;
  bool operator==(const SheParams&) const = default;
};

struct BackendConfig {
  BackendKind kind = BackendKind::Transparent;
  int eta = 0;  // integer-she: 0 selects the default for the target depth
  int target_depth = 8;
};

// log2 bound of a fresh encryption's noise.
double fresh_noise_bits(int rho, int rho_prime, int tau);
// Noise bits the depth model assigns after d multiplicative levels.
double model_noise_bits(double fresh, int d);
// Derived parameters for security parameter K; throws BudgetError when the
// requested modulus leaves no multiplicative level.
SheParams she_params(int K, int eta, int target_depth);

// Serialized ciphertext of fixed length per key.
struct Ciphertext {
  std::vector<std::uint8_t> bytes;
  bool operator==(const Ciphertext&) const = default;
};
using CtWord = std::vector<Ciphertext>;

std::vector<std::uint8_t> concat(const CtWord& w);
CtWord split(std::span<const std::uint8_t> bytes, std::size_t ct_bytes);

// Static resource use of a circuit on given inputs.
struct BudgetReport {
  int level = 0;
  double noise_bits = 0;
  bool ok = true;
  std::string reason;
};

class PublicKey {
 public:
  virtual ~PublicKey() = default;
  virtual BackendKind kind() const = 0;
  virtual std::size_t ciphertext_bytes() const = 0;
  std::size_t lambda() const { return 8 * ciphertext_bytes(); }

  virtual Ciphertext enc(bool bit, Rng& rng) const = 0;
  // Noise-free encryption usable as a public constant.
  virtual Ciphertext trivial(bool bit) const = 0;
  // Evaluates every output of c. Deterministic; throws BudgetError (depth or
  // noise) before computing anything when the result could be wrong.
  virtual CtWord eval_all(const circuit::Circuit& c, std::span<const Ciphertext> inputs) const = 0;
  virtual BudgetReport budget(const circuit::Circuit& c, std::span<const Ciphertext> inputs) const = 0;
  // Throws FormatError for a ciphertext this key cannot have produced.
  virtual void check(const Ciphertext& c) const = 0;
  virtual int depth_budget() const = 0;  // -1: unbounded

  virtual std::vector<std::uint8_t> serialize() const = 0;
  std::string fingerprint() const;
};

class SecretKey {
 public:
  virtual ~SecretKey() = default;
  virtual BackendKind kind() const = 0;
  virtual bool dec(const Ciphertext& c) const = 0;
  virtual std::vector<std::uint8_t> serialize() const = 0;
};

struct KeyPair {
  std::shared_ptr<const PublicKey> pk;
  std::shared_ptr<const SecretKey> sk;
};

// K is the security parameter; K < 8 is rejected.
KeyPair keygen(const BackendConfig& cfg, int K, Rng& rng);

std::shared_ptr<const PublicKey> load_public_key(std::span<const std::uint8_t> bytes);
std::shared_ptr<const SecretKey> load_secret_key(std::span<const std::uint8_t> bytes);

CtWord enc_word(const PublicKey& pk, std::span<const std::uint8_t> bits, Rng& rng);
CtWord trivial_word(const PublicKey& pk, std::span<const std::uint8_t> bits);
BitVec dec_word(const SecretKey& sk, const CtWord& w);

// Single-output evaluation.
Ciphertext eval(const PublicKey& pk, const circuit::Circuit& c, std::span<const Ciphertext> inputs);
// Multi-hop evaluation of a compatible sequence; budget checked on the whole chain.
CtWord eval_star(const PublicKey& pk, const std::vector<circuit::Circuit>& fs, const CtWord& c0);

// Ciphertext word container for standalone files.
std::vector<std::uint8_t> serialize_word(const PublicKey& pk, const CtWord& w);
CtWord deserialize_word(const PublicKey& pk, std::span<const std::uint8_t> bytes);

// Length-prefixed container: "TVHE", version, backend tag, kind, then fields.
namespace container {
enum class Kind : std::uint8_t { PublicKey = 1, SecretKey = 2, CiphertextWord = 3 };
inline constexpr std::uint8_t kVersion = 1;
std::vector<std::uint8_t> write(BackendKind backend, Kind kind, const std::vector<std::vector<std::uint8_t>>& fields);
struct Parsed {
  BackendKind backend;
  Kind kind;
  std::vector<std::vector<std::uint8_t>> fields;
};
Parsed read(std::span<const std::uint8_t> bytes);
}  // namespace container

}  // namespace tabverify::he
