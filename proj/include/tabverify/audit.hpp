#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tabverify/certificate.hpp"
#include "tabverify/protocol.hpp"

namespace tabverify::audit {

struct AuditReport {
  bool ok = false;
  std::string reason;  // first failed check; empty when ok

  int value() const { return ok ? 1 : 0; }
};

// Recomputes every recorded table evaluation and replays the honest verifier
// against the recorded answers; the replay must reproduce the certificate.
AuditReport vs_eval_honest(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache = nullptr);

// vs_eval_honest plus: every encode answer has its checker tuples, every
// commitment opens, every cipher output is recomputed and decrypts to the answer.
AuditReport vs_eval_general(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache = nullptr);

// Picks the auditor by the certificate's mode.
AuditReport audit_certificate(const Certificate& c, std::shared_ptr<protocol::EvalCache> cache = nullptr);
// Parses first; a certificate that does not parse fails the audit.
AuditReport audit_text(const std::string& text, std::shared_ptr<protocol::EvalCache> cache = nullptr);

// Changes one recorded field (JSON pointer returned) without resealing.
std::string mutate(nlohmann::json& j, Rng& rng);

struct FuzzReport {
  std::size_t trials = 0;
  std::size_t detected = 0;
  std::vector<std::string> undetected;  // pointers of mutations the audit accepted
};

// Mutates, reseals and audits `trials` copies of a valid certificate.
FuzzReport fuzz(const std::string& certificate_text, std::size_t trials, std::uint64_t seed,
                std::shared_ptr<protocol::EvalCache> cache = nullptr);

}  // namespace tabverify::audit
