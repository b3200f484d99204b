#include "doctest.h"
#include "session_support.hpp"
#include "tabverify/certificate.hpp"
#include "tabverify/messages.hpp"

using namespace tabverify;
using namespace tabverify::protocol;

namespace {

const PublicParams& params() { return testing::worked_setup()->params; }

audit::Certificate honest_certificate() {
  static const audit::Certificate c = [] {
    const auto s = testing::worked_setup();
    return testing::run_session(s, samples::worked_spec(), testing::worked_cp(), testing::small_config(Mode::General, 5))
        .certificate;
  }();
  return c;
}

}  // namespace

TEST_CASE("public parameters round trip") {
  const PublicParams& pp = params();
  const auto j = pp.to_json();
  const PublicParams back = PublicParams::from_json(j);
  CHECK(back.digest() == pp.digest());
  CHECK(back.programs == pp.programs);
  CHECK(back.structure == pp.structure);
  CHECK(back.budget == pp.budget);
  CHECK(back.universal->circuit.digest() == pp.universal->circuit.digest());
  CHECK(pp.programs.size() == pp.table_count());
  for (const auto& w : pp.programs) CHECK(w.size() == pp.budget.program_bits());

  auto bad = j;
  bad["cipher_rounds"] = 0;
  CHECK_THROWS_AS(PublicParams::from_json(bad), FormatError);
  bad = j;
  bad["K"] = 4;
  CHECK_THROWS_AS(PublicParams::from_json(bad), FormatError);
}

TEST_CASE("encrypted words in base64") {
  const auto& pk = *params().hpk;
  Rng rng(1);
  const he::CtWord w = he::enc_word(pk, rng.bits(16), rng);
  CHECK(word_from_base64(word_to_base64(w), pk) == w);
  std::string cut = word_to_base64(w);
  cut.resize(cut.size() - 4);
  CHECK_THROWS_AS(word_from_base64(cut, pk), FormatError);
  CHECK_THROWS_AS(word_from_base64("not base64!", pk), FormatError);
}

TEST_CASE("encode messages round trip") {
  const auto& pk = *params().hpk;
  Rng rng(2);
  EncodeQuery q1{QueryKind::Q1, 3, 0, bits_from_string("0000000100101110"), {}, {}};
  CHECK(EncodeQuery::from_json(q1.to_json(), pk) == q1);
  EncodeQuery q2;
  q2.kind = QueryKind::Q2;
  q2.table = 5;
  q2.inputs = {he::enc_word(pk, rng.bits(16), rng)};
  q2.outputs = {he::enc_word(pk, rng.bits(16), rng), he::enc_word(pk, rng.bits(16), rng)};
  CHECK(EncodeQuery::from_json(q2.to_json(), pk) == q2);

  EncodeAnswer a;
  a.ports = {{PortKind::Top, {}}, {PortKind::Bottom, {}}, {PortKind::Payload, bits_from_string("00000010")}};
  CHECK(EncodeAnswer::from_json(a.to_json(), pk) == a);
  CHECK(EncodeAnswer::from_json(EncodeAnswer::null_answer().to_json(), pk) == EncodeAnswer::null_answer());
  EncodeAnswer w;
  w.word = he::enc_word(pk, rng.bits(16), rng);
  CHECK(EncodeAnswer::from_json(w.to_json(), pk) == w);

  PathQuery pq{{0, 4}};
  CHECK(PathQuery::from_json(pq.to_json()) == pq);
  const auto spec = table::parse_graph(samples::worked_spec());
  const PathAnswer pa = table::Assignment{{"a", 46}, {"b", 1}};
  CHECK(path_answer_from_json(path_answer_to_json(pa, spec.inputs), spec.inputs) == pa);
  CHECK(path_answer_from_json(path_answer_to_json(std::nullopt, spec.inputs), spec.inputs) == std::nullopt);
}

TEST_CASE("checker messages round trip") {
  const auto& pk = *params().hpk;
  const auto& code = params().code;
  Rng rng(3);
  CheckerQuery q;
  q.table = 2;
  q.target = Target::Output;
  q.index = 0;
  q.p = he::enc_word(pk, rng.bits(16), rng);
  q.y = he::enc_word(pk, rng.bits(8), rng);
  for (int i = 0; i < 2; ++i) q.challenges.push_back(commitment::choose_challenge(code.length, rng));
  CHECK(CheckerQuery::from_json(q.to_json(), pk) == q);

  std::vector<commitment::CommitMessage> commits;
  std::vector<commitment::RevealMessage> reveals;
  for (const auto& r : q.challenges) {
    const BitVec seed = rng.bits(16);
    const BitVec data = rng.bits(code.message_bits);
    commits.push_back(commitment::commit_respond(data, r, seed, code));
    reveals.push_back({seed, data});
  }
  CHECK(commit_answer_from_json(commit_answer_to_json(commits), q.challenges) == CommitAnswer(commits));
  CHECK(commit_answer_from_json(commit_answer_to_json(std::nullopt), q.challenges) == std::nullopt);
  CHECK_THROWS_AS(commit_answer_from_json(commit_answer_to_json(commits), {q.challenges[0]}), FormatError);
  CHECK(reveal_answer_from_json(reveal_answer_to_json(reveals)) == RevealAnswer(reveals));
}

TEST_CASE("slices") {
  const auto& s = params().structure;
  // PT1 feeds the internal z; PT5 drives the external y1.
  CHECK(slice_for(s, 0, Target::Input, 0) == Slice::Word);
  CHECK(slice_for(s, 0, Target::Output, 0) == Slice::Tag);
  CHECK(slice_for(s, 4, Target::Output, 0) == Slice::Payload);
  const BitVec w = bits_from_string("0000000100101110");
  CHECK(take_slice(w, Slice::Word) == w);
  CHECK(take_slice(w, Slice::Tag) == bits_from_string("00000001"));
  CHECK(take_slice(w, Slice::Payload) == bits_from_string("00101110"));
}

TEST_CASE("frames") {
  Frame f{"encode", "s1", {{"x", 1}, {"y", "z"}}};
  const auto bytes = encode_frame(f);
  REQUIRE(bytes.size() > 4);
  const std::size_t len = (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) | (std::size_t{bytes[2]} << 8) |
                          bytes[3];
  CHECK(len == bytes.size() - 4);
  const Frame g = decode_frame(std::span<const std::uint8_t>(bytes).subspan(4));
  CHECK(g.type == f.type);
  CHECK(g.session == f.session);
  CHECK(g.body == f.body);
  const std::string junk = "{\"type\": 3}";
  CHECK_THROWS_AS(decode_frame(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size())),
                  FormatError);
}

TEST_CASE("mode names") {
  CHECK(mode_from_string(to_string(Mode::Honest)) == Mode::Honest);
  CHECK(mode_from_string(to_string(Mode::General)) == Mode::General);
  CHECK_THROWS_AS(mode_from_string("lenient"), FormatError);
}

TEST_CASE("certificate round trip and seal") {
  const audit::Certificate c = honest_certificate();
  CHECK(c.accept);
  const std::string text = audit::serialize(c);
  const audit::Certificate back = audit::parse_certificate(text);
  CHECK(audit::to_json(back) == audit::to_json(c));
  CHECK(back.qa_e.size() == c.qa_e.size());
  CHECK(back.qa_c.size() == c.qa_c.size());

  auto j = nlohmann::json::parse(text);
  j["verdict"] = "reject";
  CHECK_THROWS_WITH_AS(audit::from_json(j), doctest::Contains("seal"), FormatError);
  audit::reseal(j);
  CHECK_FALSE(audit::from_json(j).accept);

  j = nlohmann::json::parse(text);
  j["version"] = audit::kCertificateVersion + 1;
  CHECK_THROWS_WITH_AS(audit::from_json(j), doctest::Contains("version"), FormatError);
  j = nlohmann::json::parse(text);
  j["format"] = "something-else";
  CHECK_THROWS_AS(audit::from_json(j), FormatError);
  CHECK_THROWS_AS(audit::parse_certificate("{"), FormatError);
}
