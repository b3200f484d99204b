#include "doctest.h"
#include "session_support.hpp"
#include "tabverify/audit.hpp"

using namespace tabverify;
using namespace tabverify::audit;

namespace {

const protocol::SessionResult& honest(protocol::Mode mode) {
  static const auto general = testing::run_session(testing::worked_setup(), samples::worked_spec(), testing::worked_cp(),
                                                   testing::small_config(protocol::Mode::General, 21));
  static const auto plain = testing::run_session(testing::worked_setup(), samples::worked_spec(), testing::worked_cp(),
                                                 testing::small_config(protocol::Mode::Honest, 21));
  return mode == protocol::Mode::General ? general : plain;
}

}  // namespace

TEST_CASE("honest certificates audit to 1") {
  for (auto mode : {protocol::Mode::Honest, protocol::Mode::General}) {
    const auto& c = honest(mode).certificate;
    REQUIRE(c.accept);
    const auto r = audit_certificate(c);
    CHECK_MESSAGE(r.ok, r.reason);
    CHECK(r.value() == 1);
    CHECK(audit_text(serialize(c)).ok);
  }
  CHECK(vs_eval_honest(honest(protocol::Mode::General).certificate).ok);
  // The general auditor needs checker tuples.
  CHECK_FALSE(vs_eval_general(honest(protocol::Mode::Honest).certificate).ok);
}

TEST_CASE("unparsable certificates audit to 0") {
  CHECK(audit_text("").value() == 0);
  CHECK(audit_text("{\"format\": \"tabverify-certificate\"}").value() == 0);
  std::string text = serialize(honest(protocol::Mode::General).certificate);
  text[text.size() / 2] ^= 1;
  CHECK(audit_text(text).value() == 0);
}

TEST_CASE("resealed edits are caught") {
  const auto j0 = to_json(honest(protocol::Mode::General).certificate);
  auto edit = [&](auto f) {
    auto j = j0;
    f(j);
    reseal(j);
    return audit_text(j.dump());
  };
  CHECK_FALSE(edit([](auto& j) { j["verdict"] = "reject"; }).ok);
  CHECK_FALSE(edit([](auto& j) { j["coins"] = j["coins"].template get<std::uint64_t>() + 1; }).ok);
  CHECK_FALSE(edit([](auto& j) { j["failures"].push_back("invented"); }).ok);
  CHECK_FALSE(edit([](auto& j) { j["qa_c"].erase(j["qa_c"].size() - 1); }).ok);
  CHECK_FALSE(edit([](auto& j) { j["results"][0]["ok"] = false; }).ok);
  CHECK_FALSE(edit([](auto& j) { j["extra_inputs"].push_back({{"a", 1}, {"b", true}}); }).ok);
}

TEST_CASE("mutate changes one leaf") {
  const auto j0 = to_json(honest(protocol::Mode::General).certificate);
  Rng rng(22);
  for (int n = 0; n < 50; ++n) {
    auto j = j0;
    const std::string ptr = mutate(j, rng);
    CHECK_FALSE(ptr.empty());
    CHECK(j != j0);
    auto diff = nlohmann::json::diff(j0, j);
    CHECK(diff.size() == 1);
  }
}

TEST_CASE("fuzzing detects every mutation") {
  const std::string text = serialize(honest(protocol::Mode::General).certificate);
  const FuzzReport r = fuzz(text, 60, 23);
  CHECK(r.trials == 60);
  CHECK(r.detected == 60);
  for (const auto& u : r.undetected) MESSAGE("undetected: " << u);
}

TEST_CASE("audit of a rejected honest session") {
  // A wrong critical point makes an honest developer fail; the audit confirms it.
  auto cp = testing::worked_cp();
  cp[0].y["y2"] = 3;
  const auto r = testing::run_session(testing::worked_setup(), samples::worked_spec(), cp,
                                      testing::small_config(protocol::Mode::General, 24));
  CHECK_FALSE(r.accept);
  CHECK(audit_certificate(r.certificate).ok);
}
