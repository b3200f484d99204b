#pragma once

#include "tabverify/he.hpp"

namespace tabverify::he::detail {

KeyPair transparent_keygen(Rng& rng);
std::shared_ptr<const PublicKey> transparent_public(const container::Parsed& p);
std::shared_ptr<const SecretKey> transparent_secret(const container::Parsed& p);

KeyPair integer_keygen(const SheParams& params, Rng& rng);
std::shared_ptr<const PublicKey> integer_public(const container::Parsed& p);
std::shared_ptr<const SecretKey> integer_secret(const container::Parsed& p);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t pos);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t pos);

// Live gates of c (those reachable from an output).
std::vector<char> live_gates(const circuit::Circuit& c);

}  // namespace tabverify::he::detail
