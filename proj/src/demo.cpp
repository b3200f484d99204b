#include "tabverify/demo.hpp"

#include <thread>

#include "tabverify/samples.hpp"

namespace tabverify::demo {

using nlohmann::json;

DemoConfig worked_config() {
  DemoConfig c;
  c.graph = samples::worked_graph();
  c.spec = samples::worked_spec();
  c.cp = samples::worked_critical_points();
  return c;
}

std::set<std::size_t> plaintext_covered(const table::TransformedGraph& tg, const table::Assignment& x) {
  std::set<std::size_t> out;
  const auto r = table::evaluate_plain(tg, x);
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    if (r.trace[i].evaluated && !r.trace[i].outputs.empty() && r.trace[i].outputs[0].top) out.insert(i);
  return out;
}

std::vector<std::string> labels(const std::set<std::size_t>& tables) {
  std::vector<std::string> out;
  for (std::size_t i : tables) out.push_back(vga::table_label(i));
  return out;
}

DemoResult run_demo(const DemoConfig& cfg) {
  const auto g = table::parse_graph(cfg.graph);
  const auto spec = table::parse_graph(cfg.spec);
  const auto cp = vga::critical_points_from_json(json::parse(cfg.cp), spec);

  protocol::EncryptConfig ec;
  ec.backend.kind = he::backend_from_string(cfg.backend);
  Rng rng(cfg.seed);
  const auto setup = protocol::vs_encrypt(cfg.K, g, ec, rng);

  protocol::VerifierConfig vc;
  vc.mode = protocol::Mode::General;
  vc.suite = {vga::kDevPathId, cfg.seed, cfg.budget};
  vc.extra_inputs = {cfg.input};
  vc.coins = cfg.seed;
  vc.session = "demo-" + std::to_string(cfg.seed);

  DemoResult r;
  auto [vt, dt] = protocol::loopback_pair();
  protocol::Developer dev(setup, protocol::Strategy::Honest, cfg.seed);
  std::thread server([&dev, t = dt.get()] { protocol::serve(dev, *t); });
  try {
    protocol::RemoteLink link(*vt);
    const auto pp = link.fetch_params(vc.session);
    r.session = protocol::verify_session(pp, cfg.spec, cp, vc, link);
  } catch (...) {
    vt->close();
    server.join();
    throw;
  }
  server.join();

  const auto& cert = r.session.certificate;
  r.coverage = protocol::coverage_report(cert);
  for (std::size_t i : r.coverage.covered()) r.covered.insert(i);
  for (const auto& res : cert.results)
    for (std::size_t i : plaintext_covered(setup->transformed, res.x)) r.expected_covered.insert(i);

  // Session coverage of the chosen input alone: tables with a non-bottom answer.
  for (std::size_t k = 0; k < cert.results.size(); ++k) {
    if (cert.results[k].source != "extra" || cert.results[k].x != cfg.input) continue;
    for (std::size_t i = 0; i < r.session.runs[k].tables.size(); ++i) {
      const auto& run = r.session.runs[k].tables[i];
      if (!run.evaluated || run.null) continue;
      for (const auto& p : run.answer.ports)
        if (p.kind != protocol::PortKind::Bottom) r.input_covered.insert(i);
    }
  }
  r.input_truth = plaintext_covered(setup->transformed, cfg.input);
  r.truth = table::evaluate_plain(setup->transformed, cfg.input).outputs;

  r.audit = audit::audit_certificate(audit::parse_certificate(audit::serialize(cert)));

  r.summary = {
      {"input", table::assignment_to_json(cfg.input, spec.inputs)},
      {"reference_claim",
       {{"y", "(True,⊥,⊥,2,⊥)"},
        {"covered", {"PT1", "PT5", "PT7"}},
        {"note", "outputs claimed by the reference walkthrough; they disagree with the plaintext evaluator"}}},
      {"ground_truth",
       {{"y", table::assignment_to_json(r.truth, spec.outputs)},
        {"spec_y", table::assignment_to_json(table::evaluate_original(spec, cfg.input), spec.outputs)},
        {"covered", labels(r.input_truth)}}},
      {"session",
       {{"verdict", r.session.accept ? "accept" : "reject"},
        {"covered_on_input", labels(r.input_covered)},
        {"covered_overall", labels(r.covered)},
        {"coverage_matches_trace", r.coverage_ok()},
        {"audit", r.audit.value()}}}};
  return r;
}

}  // namespace tabverify::demo
