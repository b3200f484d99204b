#include <fstream>
#include <sstream>

#include "tabverify/certificate.hpp"

namespace tabverify::audit {

namespace {

std::string chain(const std::string& prev, const nlohmann::json& rec) { return sha256_hex(prev + rec.dump()); }

const char* kHeaderKeys[] = {"format", "version", "mode", "session", "params_digest", "spec", "vga", "extra_inputs", "cp"};
const char* kTrailerKeys[] = {"results", "verdict", "failures", "coins", "sk", "ct_sk"};

std::string compute_seal(const nlohmann::json& j) {
  nlohmann::json header = nlohmann::json::object();
  for (const char* k : kHeaderKeys) header[k] = j.at(k);
  std::string h = sha256_hex(header.dump());
  for (const auto& r : j.at("qa_e")) h = chain(h, r);
  for (const auto& r : j.at("qa_c")) h = chain(h, r);
  nlohmann::json trailer = nlohmann::json::object();
  for (const char* k : kTrailerKeys) trailer[k] = j.at(k);
  return chain(h, trailer);
}

}  // namespace

std::optional<commitment::Transcript> QacRecord::transcript(std::size_t data_bits) const {
  if (!commits || !proof_sent || !reveals) return std::nullopt;
  if (commits->size() != q.challenges.size() || reveals->size() != q.challenges.size()) return std::nullopt;
  commitment::Transcript t;
  t.data_bits = data_bits;
  for (std::size_t b = 0; b < q.challenges.size(); ++b) t.blocks.push_back({q.challenges[b], (*commits)[b], (*reveals)[b]});
  return t;
}

nlohmann::json to_json(const Certificate& c) {
  const table::TableGraph spec = table::parse_graph(c.spec);
  nlohmann::json j;
  j["format"] = kCertificateFormat;
  j["version"] = kCertificateVersion;
  j["mode"] = protocol::to_string(c.mode);
  j["session"] = c.session;
  j["params"] = c.params.to_json();
  j["params_digest"] = sha256_hex(j["params"].dump());
  j["spec"] = c.spec;
  j["vga"] = c.vga.to_json();
  j["extra_inputs"] = nlohmann::json::array();
  for (const auto& x : c.extra_inputs) j["extra_inputs"].push_back(table::assignment_to_json(x, spec.inputs));
  j["cp"] = vga::critical_points_to_json(c.cp, spec);
  j["qa_e"] = nlohmann::json::array();
  for (const auto& r : c.qa_e) {
    if (r.path)
      j["qa_e"].push_back({{"path", r.pq.to_json()}, {"answer", protocol::path_answer_to_json(r.pa, spec.inputs)}});
    else
      j["qa_e"].push_back({{"q", r.q.to_json()}, {"a", r.a.to_json()}});
  }
  j["qa_c"] = nlohmann::json::array();
  for (const auto& r : c.qa_c)
    j["qa_c"].push_back({{"qae", r.qae},
                         {"q", r.q.to_json()},
                         {"commit", protocol::commit_answer_to_json(r.commits)},
                         {"proof", r.proof_sent},
                         {"reveal", protocol::reveal_answer_to_json(r.reveals)}});
  j["results"] = nlohmann::json::array();
  for (const auto& r : c.results)
    j["results"].push_back({{"source", r.source},
                            {"x", table::assignment_to_json(r.x, spec.inputs)},
                            {"y", table::assignment_to_json(r.y, spec.outputs)},
                            {"expected", table::assignment_to_json(r.expected, spec.outputs)},
                            {"ok", r.ok}});
  j["verdict"] = c.accept ? "accept" : "reject";
  j["failures"] = c.failures;
  j["coins"] = c.coins;
  j["sk"] = bits_to_string(c.sk);
  j["ct_sk"] = protocol::word_to_base64(c.ct_sk);
  j["seal"] = compute_seal(j);
  return j;
}

void reseal(nlohmann::json& j) {
  j["params_digest"] = sha256_hex(j.at("params").dump());
  j["seal"] = compute_seal(j);
}

Certificate from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kCertificateFormat) throw FormatError("not a certificate");
    const int version = j.at("version").get<int>();
    if (version != kCertificateVersion)
      throw FormatError("unsupported certificate version " + std::to_string(version) + " (this build reads version " +
                        std::to_string(kCertificateVersion) + ")");
    if (j.at("seal").get<std::string>() != compute_seal(j)) throw FormatError("certificate seal mismatch (corrupted or edited)");
    if (j.at("params_digest").get<std::string>() != sha256_hex(j.at("params").dump()))
      throw FormatError("public parameter digest mismatch");
    Certificate c;
    c.mode = protocol::mode_from_string(j.at("mode").get<std::string>());
    c.session = j.at("session").get<std::string>();
    c.params = protocol::PublicParams::from_json(j.at("params"));
    c.spec = j.at("spec").get<std::string>();
    const table::TableGraph spec = table::parse_graph(c.spec);
    const he::PublicKey& pk = *c.params.hpk;
    c.vga = vga::SuiteConfig::from_json(j.at("vga"));
    for (const auto& x : j.at("extra_inputs")) c.extra_inputs.push_back(table::assignment_from_json(x, spec.inputs));
    c.cp = vga::critical_points_from_json(j.at("cp"), spec);
    for (const auto& r : j.at("qa_e")) {
      QaeRecord rec;
      if (r.contains("path")) {
        rec.path = true;
        rec.pq = protocol::PathQuery::from_json(r.at("path"));
        rec.pa = protocol::path_answer_from_json(r.at("answer"), spec.inputs);
      } else {
        rec.q = protocol::EncodeQuery::from_json(r.at("q"), pk);
        rec.a = protocol::EncodeAnswer::from_json(r.at("a"), pk);
      }
      c.qa_e.push_back(std::move(rec));
    }
    for (const auto& r : j.at("qa_c")) {
      QacRecord rec;
      rec.qae = r.at("qae").get<std::size_t>();
      rec.q = protocol::CheckerQuery::from_json(r.at("q"), pk);
      rec.commits = protocol::commit_answer_from_json(r.at("commit"), rec.q.challenges);
      rec.proof_sent = r.at("proof").get<bool>();
      rec.reveals = protocol::reveal_answer_from_json(r.at("reveal"));
      c.qa_c.push_back(std::move(rec));
    }
    for (const auto& r : j.at("results"))
      c.results.push_back({r.at("source").get<std::string>(), table::assignment_from_json(r.at("x"), spec.inputs),
                           table::assignment_from_json(r.at("y"), spec.outputs),
                           table::assignment_from_json(r.at("expected"), spec.outputs), r.at("ok").get<bool>()});
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "accept" && verdict != "reject") throw FormatError("unknown verdict '" + verdict + "'");
    c.accept = verdict == "accept";
    c.failures = j.at("failures").get<std::vector<std::string>>();
    c.coins = j.at("coins").get<std::uint64_t>();
    c.sk = bits_from_string(j.at("sk").get<std::string>());
    c.ct_sk = protocol::word_from_base64(j.at("ct_sk").get<std::string>(), pk);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed certificate: ") + e.what());
  }
}

std::string serialize(const Certificate& c) { return to_json(c).dump(); }

Certificate parse_certificate(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("certificate is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

void save_certificate(const Certificate& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize(c);
  if (!out) throw Error("cannot write " + path);
}

Certificate load_certificate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_certificate(ss.str());
}

}  // namespace tabverify::audit
