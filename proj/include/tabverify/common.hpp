#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabverify {

// One bit per element, values 0 or 1. Bit strings throughout the toolkit are
// small (at most a few thousand bits), so the byte-per-bit layout is kept for
// clarity.
using BitVec = std::vector<std::uint8_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problem in an input document (graph source, certificate, key file).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A requested object does not fit the configured size/depth budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Deterministic, seedable randomness source. Only raw 64-bit outputs of
// mt19937_64 are used (its output sequence is fixed by the standard), so
// derived values are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);
  bool bit() { return (next() >> 63) != 0; }
  BitVec bits(std::size_t n);
  std::vector<std::uint8_t> bytes(std::size_t n);

  // Fresh seed for a sub-stream.
  std::uint64_t fork() { return next(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t random_device_seed();

// splitmix64 finalizer; used wherever a fixed public mixing function is needed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Big-endian (MSB first) conversions between integers and bit vectors.
BitVec uint_to_bits(std::uint64_t value, std::size_t width);
std::uint64_t bits_to_uint(std::span<const std::uint8_t> bits);

std::string bits_to_string(std::span<const std::uint8_t> bits);
BitVec bits_from_string(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::vector<std::uint8_t> sha256(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace tabverify
