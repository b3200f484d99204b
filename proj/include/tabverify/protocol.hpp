#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tabverify/certificate.hpp"
#include "tabverify/messages.hpp"
#include "tabverify/vga.hpp"

namespace tabverify::protocol {

// Channel failure; a session hitting it ends without a verdict.
class ChannelError : public Error {
 public:
  using Error::Error;
};

// Scripted developer behaviours used to exercise the checker.
enum class Strategy { Honest, FlipPayload, FlipTag, SwapAnswers, ReplayForeign };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct EncryptConfig {
  he::BackendConfig backend;
  int cipher_rounds = 8;
  std::size_t code_message_bits = 4;
  double code_epsilon = 0.25;
  std::uint64_t code_seed = 1;
};

struct DeveloperSetup {
  table::TableGraph graph;
  table::TransformedGraph transformed;
  std::vector<circuit::Circuit> circuits;  // C_i per transformed table
  he::KeyPair keys;
  PublicParams params;
};

// Transforms, compiles and encrypts the design. Throws BudgetError when the
// universal circuit exceeds the backend's depth budget.
std::shared_ptr<const DeveloperSetup> vs_encrypt(int K, const table::TableGraph& g, const EncryptConfig& cfg, Rng& rng);
std::shared_ptr<const DeveloperSetup> vs_encrypt(int K, const table::TableGraph& g, const EncryptConfig& cfg,
                                                 he::KeyPair keys, Rng& rng);

// Memo of deterministic table evaluations, shareable across sessions and audits.
class EvalCache {
 public:
  explicit EvalCache(std::size_t limit = 1 << 16) : limit_(limit) {}
  std::optional<std::vector<he::CtWord>> find(const std::string& key) const;
  void put(const std::string& key, const std::vector<he::CtWord>& value);

 private:
  std::size_t limit_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::vector<he::CtWord>> map_;
};

// T'_i(x^i) = Eval(hpk, U, E_Ci || x^i), restricted to the table's outputs.
class TableEvaluator {
 public:
  TableEvaluator(const PublicParams& pp, std::shared_ptr<EvalCache> cache = nullptr);
  std::vector<he::CtWord> evaluate(std::size_t table, const std::vector<he::CtWord>& inputs) const;
  // The same through the single-output projections U_k (needs a prepared projection set).
  std::vector<he::CtWord> evaluate_projections(std::size_t table, const std::vector<he::CtWord>& inputs) const;

 private:
  he::CtWord bus(std::size_t table, const std::vector<he::CtWord>& inputs) const;
  const PublicParams& pp_;
  std::shared_ptr<EvalCache> cache_;
  std::vector<std::string> program_digests_;
};

// Plain search for an external input whose trace makes every listed table
// produce top outputs; nullopt when the list is not a path or none is found.
std::optional<table::Assignment> find_path_input(const table::TableGraph& g, const table::TransformedGraph& tg,
                                                 const vga::Path& tables, std::uint64_t search_budget = 1 << 16);
inline std::optional<table::Assignment> find_path_input(const DeveloperSetup& dev, const vga::Path& tables,
                                                        std::uint64_t search_budget = 1 << 16) {
  return find_path_input(dev.graph, dev.transformed, tables, search_budget);
}

// Randomness of the developer's n-th session; the simulation harness mirrors it.
std::uint64_t session_seed(std::uint64_t seed, std::uint64_t session);

class Developer {
 public:
  Developer(std::shared_ptr<const DeveloperSetup> setup, Strategy strategy = Strategy::Honest, std::uint64_t seed = 1,
            std::shared_ptr<EvalCache> cache = nullptr);

  // Wipes the memory M; called at every session start.
  void reset();
  const PublicParams& params() const { return setup_->params; }
  const DeveloperSetup& setup() const { return *setup_; }

  EncodeAnswer encode(const EncodeQuery& q);
  PathAnswer path(const PathQuery& q);
  CommitAnswer checker(const CheckerQuery& q);
  RevealAnswer proof(const he::CtWord& ct_sk);

 private:
  struct Q1Record {
    std::size_t table;
    std::size_t slot;
    he::CtWord word;
  };
  struct Q2Record {
    std::size_t table;
    std::vector<he::CtWord> inputs;
    std::vector<he::CtWord> outputs;
  };
  struct Pending {
    CheckerQuery query;
    Slice slice;
    std::vector<commitment::Committer> committers;
  };

  EncodeAnswer encode_q1(const EncodeQuery& q);
  EncodeAnswer encode_q2(const EncodeQuery& q);
  bool well_formed(const he::CtWord& w, std::size_t bits) const;

  std::shared_ptr<const DeveloperSetup> setup_;
  Strategy strategy_;
  std::uint64_t seed_;
  std::uint64_t sessions_ = 0;
  Rng rng_;
  TableEvaluator evaluator_;
  std::vector<Q1Record> q1_;
  std::vector<Q2Record> q2_;
  std::optional<Pending> pending_;
  std::optional<EncodeAnswer> last_q1_;
  std::optional<BitVec> last_q1_word_;
  std::optional<EncodeAnswer> last_q2_;
};

// The verifier's view of the developer.
class DeveloperLink {
 public:
  virtual ~DeveloperLink() = default;
  virtual void open(const std::string& session) { (void)session; }
  virtual EncodeAnswer encode(const EncodeQuery& q) = 0;
  virtual PathAnswer path(const PathQuery& q) = 0;
  virtual CommitAnswer checker(const CheckerQuery& q) = 0;
  virtual RevealAnswer proof(const he::CtWord& ct_sk) = 0;
  virtual void close() {}
};

class LocalLink final : public DeveloperLink {
 public:
  explicit LocalLink(Developer& dev) : dev_(dev) {}
  void open(const std::string&) override { dev_.reset(); }
  EncodeAnswer encode(const EncodeQuery& q) override { return dev_.encode(q); }
  PathAnswer path(const PathQuery& q) override { return dev_.path(q); }
  CommitAnswer checker(const CheckerQuery& q) override { return dev_.checker(q); }
  RevealAnswer proof(const he::CtWord& ct_sk) override { return dev_.proof(ct_sk); }

 private:
  Developer& dev_;
};

// Byte transport carrying frames.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const Frame& f) = 0;
  // Throws ChannelError when the peer is gone.
  virtual Frame recv() = 0;
  virtual void close() = 0;
};

// In-process queue pair; frames are serialized exactly as on TCP.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> loopback_pair();

class TcpListener {
 public:
  // Port 0 picks a free port.
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  int port() const { return port_; }
  std::unique_ptr<Transport> accept();

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::unique_ptr<Transport> tcp_connect(const std::string& host, int port);

// Answers frames until the peer sends "close" or disconnects.
void serve(Developer& dev, Transport& t);

// Developer reached over a transport.
class RemoteLink final : public DeveloperLink {
 public:
  explicit RemoteLink(Transport& t) : t_(t) {}
  // Opens a session and returns the developer's public parameters.
  PublicParams fetch_params(const std::string& session);
  void open(const std::string& session) override;
  EncodeAnswer encode(const EncodeQuery& q) override;
  PathAnswer path(const PathQuery& q) override;
  CommitAnswer checker(const CheckerQuery& q) override;
  RevealAnswer proof(const he::CtWord& ct_sk) override;
  void close() override;

 private:
  Frame call(const std::string& type, const nlohmann::json& body, const std::string& expect);
  Transport& t_;
  std::string session_;
  std::shared_ptr<const he::PublicKey> pk_;
  std::vector<table::ExternalPort> inputs_;
  bool fresh_ = false;
};

struct VerifierConfig {
  Mode mode = Mode::General;
  vga::SuiteConfig suite;
  std::vector<table::Assignment> extra_inputs;
  std::uint64_t coins = 1;  // verifier randomness: sk, ct_sk, challenges
  std::string session = "session";
};

// Verifier-side record of one table in one evaluation.
struct TableRun {
  bool evaluated = false;  // q2 was issued
  bool null = false;       // developer answered null
  std::vector<he::CtWord> inputs;
  std::vector<he::CtWord> outputs;
  EncodeAnswer answer;
};

struct EvalResult {
  table::Assignment y;
  std::vector<TableRun> tables;
};

struct SessionResult {
  bool accept = false;
  audit::Certificate certificate;
  std::vector<EvalResult> runs;  // parallel to certificate.results
};

class Verifier {
 public:
  Verifier(const PublicParams& pp, std::string spec_source, std::vector<vga::CriticalPoint> cp, VerifierConfig cfg,
           std::shared_ptr<EvalCache> cache = nullptr);

  // One encrypted evaluation of G'(X); records every exchange.
  EvalResult eval_encrypted(DeveloperLink& dev, const table::Assignment& x);
  // Full session: suite, extra inputs, critical points, verdict, certificate.
  SessionResult run(DeveloperLink& dev);

  const symcrypto::SeKey& sk() const { return sk_; }
  const he::CtWord& ct_sk() const { return ct_sk_; }

 private:
  EncodeAnswer ask(DeveloperLink& dev, const EncodeQuery& q, std::size_t* index);
  void check_answer(DeveloperLink& dev, std::size_t qae, std::size_t table, Target target, std::size_t index,
                    const he::CtWord& p, const BitVec& expected);
  void fail(const std::string& why);

  const PublicParams& pp_;
  std::string spec_source_;
  table::TableGraph spec_;
  std::vector<vga::CriticalPoint> cp_;
  VerifierConfig cfg_;
  TableEvaluator evaluator_;
  Rng coins_;
  symcrypto::SeKey sk_;
  he::CtWord ct_sk_;
  audit::Certificate cert_;
};

SessionResult verify_session(const PublicParams& pp, const std::string& spec_source,
                             const std::vector<vga::CriticalPoint>& cp, const VerifierConfig& cfg, DeveloperLink& dev,
                             std::shared_ptr<EvalCache> cache = nullptr);

// Coverage from the public q2 answers of a certificate.
vga::CoverageReport coverage_report(const audit::Certificate& c);

}  // namespace tabverify::protocol
