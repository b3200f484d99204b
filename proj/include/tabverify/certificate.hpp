#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/messages.hpp"
#include "tabverify/vga.hpp"

namespace tabverify::audit {

inline constexpr int kCertificateVersion = 1;
inline constexpr const char* kCertificateFormat = "tabverify-certificate";

// One QA_E pair: an encode exchange or a path exchange.
struct QaeRecord {
  bool path = false;
  protocol::EncodeQuery q;
  protocol::EncodeAnswer a;
  protocol::PathQuery pq;
  protocol::PathAnswer pa;
};

// One QA_C tuple: checker query, commitment messages, revealed data.
struct QacRecord {
  std::size_t qae = 0;  // index of the QA_E pair whose answer is checked
  protocol::CheckerQuery q;
  protocol::CommitAnswer commits;
  bool proof_sent = false;
  protocol::RevealAnswer reveals;

  // Full transcript when the round reached the reveal stage.
  std::optional<commitment::Transcript> transcript(std::size_t data_bits) const;
};

struct ResultRecord {
  std::string source;  // "suite", "extra" or "cp"
  table::Assignment x;
  table::Assignment y;         // evaluated outputs (null entries allowed)
  table::Assignment expected;  // spec or critical-point outputs
  bool ok = false;
};

struct Certificate {
  protocol::Mode mode = protocol::Mode::General;
  std::string session;
  protocol::PublicParams params;
  std::string spec;  // spec graph source
  vga::SuiteConfig vga;
  std::vector<table::Assignment> extra_inputs;
  std::vector<vga::CriticalPoint> cp;
  std::vector<QaeRecord> qa_e;
  std::vector<QacRecord> qa_c;
  std::vector<ResultRecord> results;
  bool accept = false;
  std::vector<std::string> failures;
  // Verifier secrets disclosed after the verdict.
  std::uint64_t coins = 0;
  BitVec sk;
  he::CtWord ct_sk;
};

nlohmann::json to_json(const Certificate& c);
// Checks format, version, parameter digest and seal; throws FormatError.
Certificate from_json(const nlohmann::json& j);

std::string serialize(const Certificate& c);
Certificate parse_certificate(const std::string& text);
void save_certificate(const Certificate& c, const std::string& path);
Certificate load_certificate(const std::string& path);

// Recomputes the parameter digest and the seal of an edited certificate.
void reseal(nlohmann::json& j);

}  // namespace tabverify::audit
