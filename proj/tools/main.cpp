#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabverify/audit.hpp"
#include "tabverify/demo.hpp"
#include "tabverify/protocol.hpp"
#include "tabverify/samples.hpp"
#include "tabverify/sim.hpp"

namespace fs = std::filesystem;
using namespace tabverify;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kReject = 1;
constexpr int kUsage = 2;
constexpr int kAbort = 3;

// Input problems the user can fix; reported with the usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, std::string(bytes.begin(), bytes.end()));
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const std::string s = read_file(path);
  return {s.begin(), s.end()};
}

// Data directory: $TABVERIFY_DATA, else the source tree's data/ when present.
std::optional<fs::path> data_dir() {
  if (const char* env = std::getenv("TABVERIFY_DATA")) return fs::path(env);
#ifdef TABVERIFY_DATA_DIR
  if (fs::exists(TABVERIFY_DATA_DIR)) return fs::path(TABVERIFY_DATA_DIR);
#endif
  return std::nullopt;
}

std::string data_or(const std::string& name, const std::string& fallback) {
  if (auto d = data_dir(); d && fs::exists(*d / name)) return read_file((*d / name).string());
  return fallback;
}

table::TableGraph load_graph(const std::string& path, int m_width) {
  table::TableGraph g = table::parse_graph(read_file(path));
  if (m_width > 0) {
    g.width = m_width;
    table::validate(g);
  }
  return g;
}

std::pair<std::string, int> host_port(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw UsageError("expected host:port, got '" + s + "'");
  try {
    return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad port in '" + s + "'");
  }
}

// "a=46,b=true" against the given ports.
table::Assignment parse_assignment(const std::string& text, const std::vector<table::ExternalPort>& ports) {
  table::Assignment x;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value in '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    const table::ExternalPort* port = nullptr;
    for (const auto& p : ports)
      if (p.name == name) port = &p;
    if (!port) throw UsageError("unknown input '" + name + "'");
    if (port->type == table::ValueType::Bool) {
      if (value == "true" || value == "True" || value == "1") x[name] = 1;
      else if (value == "false" || value == "False" || value == "0") x[name] = 0;
      else throw UsageError("bad boolean '" + value + "' for '" + name + "'");
    } else {
      try {
        x[name] = std::stoll(value);
      } catch (const std::exception&) {
        throw UsageError("bad integer '" + value + "' for '" + name + "'");
      }
    }
  }
  for (const auto& p : ports)
    if (!x.count(p.name)) throw UsageError("input '" + p.name + "' missing in '" + text + "'");
  return x;
}

protocol::EncryptConfig encrypt_config(const std::string& backend) {
  protocol::EncryptConfig cfg;
  try {
    cfg.backend.kind = he::backend_from_string(backend);
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// Developer state file: everything needed to rebuild the same encryption.
json developer_state(const table::TableGraph& g, const he::KeyPair& keys, const std::string& backend, int K,
                     std::uint64_t seed) {
  return {{"graph", table::format_graph(g)},
          {"backend", backend},
          {"K", K},
          {"seed", seed},
          {"hpk", base64_encode(keys.pk->serialize())},
          {"hsk", base64_encode(keys.sk->serialize())}};
}

std::shared_ptr<const protocol::DeveloperSetup> load_developer(const std::string& path) {
  const json j = json::parse(read_file(path));
  const auto g = table::parse_graph(j.at("graph").get<std::string>());
  he::KeyPair keys{he::load_public_key(base64_decode(j.at("hpk").get<std::string>())),
                   he::load_secret_key(base64_decode(j.at("hsk").get<std::string>()))};
  Rng rng(j.at("seed").get<std::uint64_t>());
  return protocol::vs_encrypt(j.at("K").get<int>(), g, encrypt_config(j.at("backend").get<std::string>()), keys, rng);
}

std::shared_ptr<const protocol::DeveloperSetup> setup_from_graph(const table::TableGraph& g, const std::string& backend,
                                                                 int K, std::uint64_t seed) {
  Rng rng(seed);
  return protocol::vs_encrypt(K, g, encrypt_config(backend), rng);
}

void write_session_outputs(const fs::path& out, const audit::Certificate& cert) {
  fs::create_directories(out);
  audit::save_certificate(cert, (out / "certificate.json").string());
  const auto cov = protocol::coverage_report(cert);
  write_file(out / "coverage.json", cov.to_json().dump(2) + "\n");
  write_file(out / "coverage.txt", cov.render());
}

void print_verdict(const audit::Certificate& cert) {
  std::cout << "verdict: " << (cert.accept ? "accept" : "reject") << "\n";
  const auto spec = table::parse_graph(cert.spec);
  for (const auto& r : cert.results)
    std::cout << "  " << (r.ok ? "ok  " : "FAIL") << " " << r.source << " " << table::to_string(r.x, spec.inputs) << " -> "
              << table::to_string(r.y, spec.outputs) << " (expected " << table::to_string(r.expected, spec.outputs)
              << ")\n";
  for (const auto& f : cert.failures) std::cout << "  failure: " << f << "\n";
}

struct Options {
  std::string graph;
  std::string spec;
  std::string cp;
  std::string mode = "general";
  std::string backend = "transparent";
  int m_width = 0;
  int K = 16;
  std::string listen;
  std::string connect;
  std::uint64_t seed = 1;
  std::string cert;
  std::string out;
  std::string keys;
  std::string developer;
  std::string strategy = "honest";
  std::string vga = "sample";
  std::size_t budget = 64;
  std::vector<std::string> inputs;
  std::size_t sessions = 0;
  bool concurrent = false;
  std::size_t sequences = 1000;
  std::size_t pairs = 1000;
};

int cmd_keygen(const Options& o) {
  if (o.out.empty()) throw UsageError("keygen needs --out");
  Rng rng(o.seed);
  const auto kp = he::keygen(encrypt_config(o.backend).backend, o.K, rng);
  write_bytes(fs::path(o.out) / "hpk.key", kp.pk->serialize());
  write_bytes(fs::path(o.out) / "hsk.key", kp.sk->serialize());
  std::cout << "wrote " << o.backend << " keys (" << kp.pk->lambda() << "-bit ciphertexts) to " << o.out << "\n";
  return kOk;
}

int cmd_compile(const Options& o) {
  const auto g = load_graph(o.graph, o.m_width);
  // Completeness and disjointness over each table's declared input domain.
  bool props_ok = true;
  for (const auto& t : g.tables) {
    table::PropertyDomain dom;
    for (const auto& e : g.edges)
      if (e.from.node == table::kInputNode && e.to.node == t.name)
        if (const auto* p = g.find_input(e.from.port); p && p->range) dom.ranges[e.to.port] = *p->range;
    const auto rep = table::check_properties(t, dom, g.payload_bits());
    std::cout << "table " << t.name << ": " << (rep.complete() ? "complete" : "INCOMPLETE") << ", "
              << (rep.disjoint() ? "disjoint" : "NOT DISJOINT") << " (" << rep.points_checked << " points"
              << (rep.exhaustive ? ", exhaustive" : ", sampled") << ")\n";
    props_ok = props_ok && rep.ok();
  }
  const auto tg = table::transform(g);
  std::vector<circuit::Circuit> cs;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    cs.push_back(circuit::compile(tg, i));
    const auto d = circuit::depth(cs.back());
    std::cout << vga::table_label(i) << " (" << tg.tables[i].origin << " row " << tg.tables[i].row_index + 1
              << "): " << cs.back().gates.size() << " gates, multiplicative depth " << d.multiplicative << "\n";
  }
  const auto budget = circuit::fit_budget(cs);
  std::cout << "program length |S_C| = " << budget.program_bits() << " bits\n";
  if (!o.out.empty()) {
    json j = tg.to_json();
    write_file(o.out, j.dump(2) + "\n");
    std::cout << "wrote " << o.out << "\n";
  }
  return props_ok ? kOk : kReject;
}

int cmd_encrypt(const Options& o) {
  if (o.out.empty()) throw UsageError("encrypt needs --out");
  const auto g = load_graph(o.graph, o.m_width);
  he::KeyPair keys;
  Rng keyrng(o.seed);
  if (!o.keys.empty()) {
    keys.pk = he::load_public_key(read_bytes((fs::path(o.keys) / "hpk.key").string()));
    keys.sk = he::load_secret_key(read_bytes((fs::path(o.keys) / "hsk.key").string()));
  } else {
    keys = he::keygen(encrypt_config(o.backend).backend, o.K, keyrng);
  }
  const std::string backend = he::to_string(keys.pk->kind());
  Rng rng(o.seed);
  const auto setup = protocol::vs_encrypt(o.K, g, encrypt_config(backend), keys, rng);
  const fs::path out(o.out);
  write_file(out / "params.json", setup->params.to_json().dump() + "\n");
  write_file(out / "developer.json", developer_state(g, keys, backend, o.K, o.seed).dump(2) + "\n");
  std::cout << "encrypted " << setup->params.table_count() << " tables, |S_C| = " << setup->params.budget.program_bits()
            << " bits; params digest " << setup->params.digest() << "\n";
  return kOk;
}

int cmd_serve(const Options& o) {
  std::shared_ptr<const protocol::DeveloperSetup> setup;
  if (!o.developer.empty()) setup = load_developer(o.developer);
  else if (!o.graph.empty()) setup = setup_from_graph(load_graph(o.graph, o.m_width), o.backend, o.K, o.seed);
  else throw UsageError("serve needs --developer or --graph");
  if (o.listen.empty()) throw UsageError("serve needs --listen host:port");
  const auto strategy = protocol::strategy_from_string(o.strategy);
  const auto [host, port] = host_port(o.listen);
  protocol::TcpListener listener(host, port);
  std::cout << "listening on " << host << ":" << listener.port() << std::endl;
  auto cache = std::make_shared<protocol::EvalCache>();
  std::vector<std::thread> workers;
  for (std::size_t n = 0; o.sessions == 0 || n < o.sessions; ++n) {
    std::shared_ptr<protocol::Transport> t = listener.accept();
    auto run = [setup, strategy, cache, t, seed = o.seed + n] {
      protocol::Developer dev(setup, strategy, seed, cache);
      protocol::serve(dev, *t);
    };
    if (o.concurrent) workers.emplace_back(run);
    else run();
  }
  for (auto& w : workers) w.join();
  return kOk;
}

int cmd_verify(const Options& o) {
  if (o.spec.empty()) throw UsageError("verify needs --spec");
  const std::string spec_src = read_file(o.spec);
  const auto spec = table::parse_graph(spec_src);
  std::vector<vga::CriticalPoint> cp;
  if (!o.cp.empty()) cp = vga::critical_points_from_json(json::parse(read_file(o.cp)), spec);

  protocol::VerifierConfig cfg;
  cfg.mode = protocol::mode_from_string(o.mode);
  cfg.suite.id = o.vga == "devpath" ? vga::kDevPathId : o.vga == "sample" ? vga::kSampleId : o.vga;
  cfg.suite.seed = o.seed;
  cfg.suite.budget = o.budget;
  cfg.coins = o.seed;
  cfg.session = "verify-" + std::to_string(o.seed);
  for (const auto& s : o.inputs) cfg.extra_inputs.push_back(parse_assignment(s, spec.inputs));
  if (cfg.suite.id != vga::kDevPathId && cfg.suite.id != vga::kSampleId) throw UsageError("unknown --vga '" + o.vga + "'");

  protocol::SessionResult r;
  if (!o.connect.empty()) {
    const auto [host, port] = host_port(o.connect);
    auto t = protocol::tcp_connect(host, port);
    protocol::RemoteLink link(*t);
    const auto pp = link.fetch_params(cfg.session);
    r = protocol::verify_session(pp, spec_src, cp, cfg, link);
  } else if (!o.graph.empty() || !o.developer.empty()) {
    // In-process developer behind a loopback transport.
    const auto setup = !o.developer.empty() ? load_developer(o.developer)
                                            : setup_from_graph(load_graph(o.graph, o.m_width), o.backend, o.K, o.seed);
    auto [vt, dt] = protocol::loopback_pair();
    protocol::Developer dev(setup, protocol::strategy_from_string(o.strategy), o.seed);
    std::thread server([&dev, t = dt.get()] { protocol::serve(dev, *t); });
    try {
      protocol::RemoteLink link(*vt);
      const auto pp = link.fetch_params(cfg.session);
      r = protocol::verify_session(pp, spec_src, cp, cfg, link);
    } catch (...) {
      vt->close();
      server.join();
      throw;
    }
    server.join();
  } else {
    throw UsageError("verify needs --connect host:port, --graph or --developer");
  }
  print_verdict(r.certificate);
  if (!o.out.empty()) {
    write_session_outputs(o.out, r.certificate);
    std::cout << "wrote certificate and coverage report to " << o.out << "\n";
  }
  return r.accept ? kOk : kReject;
}

int cmd_audit(const Options& o) {
  if (o.cert.empty()) throw UsageError("audit needs --cert");
  const auto rep = audit::audit_text(read_file(o.cert));
  std::cout << "audit: " << rep.value() << (rep.ok ? "" : " (" + rep.reason + ")") << "\n";
  return rep.ok ? kOk : kReject;
}

int cmd_demo(const Options& o) {
  const fs::path out = o.out.empty() ? fs::path("demo-out") : fs::path(o.out);
  demo::DemoConfig cfg;
  cfg.graph = data_or("worked_example.tbl", samples::worked_graph());
  cfg.spec = data_or("worked_example.spec", samples::worked_spec());
  cfg.cp = data_or("worked_example.cp.json", samples::worked_critical_points());
  cfg.backend = o.backend;
  cfg.K = o.K;
  cfg.seed = o.seed;
  cfg.budget = o.budget;
  const auto r = demo::run_demo(cfg);
  const auto spec = table::parse_graph(cfg.spec);

  print_verdict(r.session.certificate);
  write_session_outputs(out, r.session.certificate);
  write_file(out / "demo.json", r.summary.dump(2) + "\n");
  // The written file must audit as well as the in-memory copy.
  const auto rep = audit::audit_certificate(audit::load_certificate((out / "certificate.json").string()));

  std::cout << "\n" << r.coverage.render();
  std::cout << "worked input " << table::to_string(cfg.input, spec.inputs) << ": ground truth "
            << table::to_string(r.truth, spec.outputs) << ", covered " << json(demo::labels(r.input_truth)).dump()
            << "\n";
  std::cout << "reference claim: Y=(True,⊥,⊥,2,⊥), covered [\"PT1\",\"PT5\",\"PT7\"] (disagrees with the evaluator)\n";
  std::cout << "coverage matches plaintext trace: " << (r.coverage_ok() ? "yes" : "NO") << "\n";
  std::cout << "audit: " << rep.value() << (rep.ok ? "" : " (" + rep.reason + ")") << "\n";
  std::cout << "wrote " << (out / "certificate.json").string() << ", coverage.json, coverage.txt, demo.json\n";
  return r.ok() && rep.ok ? kOk : kReject;
}

int cmd_sim_equiv(const Options& o) {
  const auto g = o.graph.empty() ? table::parse_graph(data_or("worked_example.tbl", samples::worked_graph()))
                                 : load_graph(o.graph, o.m_width);
  const auto cfg = encrypt_config(o.backend);
  const auto setup = setup_from_graph(g, o.backend, o.K, o.seed);
  const auto rep = sim::check_equivalence(setup, o.sequences, o.seed);
  std::cout << "oracle equivalence: " << rep.identical << "/" << rep.sequences << " sequences byte-identical ("
            << rep.answers << " answers)\n";
  for (const auto& [b, n] : rep.branches) std::cout << "  " << b << ": " << n << "\n";
  if (!rep.ok()) std::cout << "  first difference: " << rep.first_difference << "\n";

  sim::ScriptConfig sc;
  sc.seed = o.seed;
  const auto real = sim::run_experiment(sim::World::Real, g, sc, o.K, cfg, o.seed);
  const auto ideal = sim::run_experiment(sim::World::Ideal, g, sc, o.K, cfg, o.seed);
  const bool same_meta = real.metadata == ideal.metadata;
  const bool same_obs = real.transcript.observable == ideal.transcript.observable;
  std::cout << "real/ideal: metadata " << (same_meta ? "identical" : "DIFFERENT") << ", observable answers "
            << (same_obs ? "identical" : "DIFFERENT") << "\n";
  const double adv = sim::metadata_advantage(g, o.pairs, o.K, cfg, o.seed);
  std::cout << "metadata distinguisher advantage over " << o.pairs << " pairs: " << adv << "\n";
  return rep.ok() && same_meta && same_obs && adv < 0.1 ? kOk : kReject;
}

void error_record(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabverify: content-secure verification of table graphs"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "seed for keys, encryption and verifier coins");
    c->add_option("--backend", o.backend, "HE backend: transparent or integer-she");
    c->add_option("--security", o.K, "security parameter K");
    c->add_option("--m-width", o.m_width, "override the graph's word width m");
  };

  auto* keygen = app.add_subcommand("keygen", "generate an HE key pair");
  common(keygen);
  keygen->add_option("--out", o.out, "output directory");

  auto* compile = app.add_subcommand("compile", "validate, transform and compile a graph");
  common(compile);
  compile->add_option("--graph", o.graph, "table graph file")->required();
  compile->add_option("--out", o.out, "write the transformed graph as JSON");

  auto* encrypt = app.add_subcommand("encrypt", "encrypt a graph into public parameters");
  common(encrypt);
  encrypt->add_option("--graph", o.graph, "table graph file")->required();
  encrypt->add_option("--keys", o.keys, "directory with hpk.key and hsk.key");
  encrypt->add_option("--out", o.out, "output directory");

  auto* serve = app.add_subcommand("serve", "run a developer endpoint");
  common(serve);
  serve->add_option("--developer", o.developer, "developer.json written by encrypt");
  serve->add_option("--graph", o.graph, "table graph file (encrypts with --seed)");
  serve->add_option("--listen", o.listen, "host:port (port 0 picks one)");
  serve->add_option("--strategy", o.strategy, "honest, flip-payload, flip-tag, swap-answers, replay-foreign");
  serve->add_option("--sessions", o.sessions, "exit after this many connections (0: never)");
  serve->add_flag("--concurrent", o.concurrent, "serve connections in parallel");

  auto* verify = app.add_subcommand("verify", "run a verification session");
  common(verify);
  verify->add_option("--spec", o.spec, "requirements graph file");
  verify->add_option("--cp", o.cp, "critical points JSON");
  verify->add_option("--mode", o.mode, "honest or general");
  verify->add_option("--connect", o.connect, "developer host:port");
  verify->add_option("--graph", o.graph, "in-process developer from this graph");
  verify->add_option("--developer", o.developer, "in-process developer from developer.json");
  verify->add_option("--strategy", o.strategy, "in-process developer strategy");
  verify->add_option("--vga", o.vga, "test generator: sample or devpath");
  verify->add_option("--budget", o.budget, "maximum number of paths");
  verify->add_option("--input", o.inputs, "extra external input, e.g. a=46,b=true");
  verify->add_option("--out", o.out, "directory for the certificate and coverage report");

  auto* auditc = app.add_subcommand("audit", "audit a certificate");
  auditc->add_option("--cert", o.cert, "certificate file")->required();

  auto* demo = app.add_subcommand("demo", "worked example end to end");
  common(demo);
  demo->add_option("--budget", o.budget, "maximum number of paths");
  demo->add_option("--out", o.out, "output directory");

  auto* simc = app.add_subcommand("sim-equiv", "oracle equivalence and real/ideal experiments");
  common(simc);
  simc->add_option("--graph", o.graph, "table graph file (default: worked example)");
  simc->add_option("--sequences", o.sequences, "number of random query sequences");
  simc->add_option("--pairs", o.pairs, "metadata distinguisher pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (keygen->parsed()) return cmd_keygen(o);
    if (compile->parsed()) return cmd_compile(o);
    if (encrypt->parsed()) return cmd_encrypt(o);
    if (serve->parsed()) return cmd_serve(o);
    if (verify->parsed()) return cmd_verify(o);
    if (auditc->parsed()) return cmd_audit(o);
    if (demo->parsed()) return cmd_demo(o);
    if (simc->parsed()) return cmd_sim_equiv(o);
  } catch (const UsageError& e) {
    error_record("usage", e.what());
    return kUsage;
  } catch (const table::ParseError& e) {
    error_record("parse", e.what());
    return kUsage;
  } catch (const protocol::ChannelError& e) {
    error_record("protocol", e.what());
    return kAbort;
  } catch (const BudgetError& e) {
    error_record("budget", e.what());
    return kAbort;
  } catch (const FormatError& e) {
    error_record("format", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    error_record("error", e.what());
    return kAbort;
  }
  return kUsage;
}
