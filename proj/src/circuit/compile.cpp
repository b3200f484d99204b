#include <map>

#include "tabverify/circuit.hpp"

namespace tabverify::circuit {

namespace {

using table::Expr;
using table::ExprOp;
using table::ValueType;
using Wire = Builder::Wire;
using arith::Word;

class ExprCompiler {
 public:
  ExprCompiler(Builder& b, const std::map<std::string, Word>& env, int h) : b_(b), env_(env), h_(h) {}

  // Ints are h-bit little-endian words; bools are one-wire words.
  Word run(const Expr& e) {
    switch (e.op) {
      case ExprOp::Const:
        if (e.type == ValueType::Bool) return {Builder::constant(e.value != 0)};
        if (e.value < -(std::int64_t{1} << (h_ - 1)) || e.value > (std::int64_t{1} << (h_ - 1)) - 1)
          throw BudgetError("width overflow: constant " + std::to_string(e.value) + " exceeds " +
                            std::to_string(h_) + "-bit payload");
        return arith::constant(e.value, h_);
      case ExprOp::Input: {
        auto it = env_.find(e.name);
        if (it == env_.end()) throw Error("compile: unbound input '" + e.name + "'");
        return it->second;
      }
      case ExprOp::Add: return arith::add(b_, run(*e.args[0]), run(*e.args[1]));
      case ExprOp::Sub: return arith::sub(b_, run(*e.args[0]), run(*e.args[1]));
      case ExprOp::Mul: return arith::mul(b_, run(*e.args[0]), run(*e.args[1]));
      case ExprOp::Neg: return arith::neg(b_, run(*e.args[0]));
      case ExprOp::Lt: return {arith::less_signed(b_, run(*e.args[0]), run(*e.args[1]))};
      case ExprOp::Gt: return {arith::less_signed(b_, run(*e.args[1]), run(*e.args[0]))};
      case ExprOp::Le: return {b_.not_(arith::less_signed(b_, run(*e.args[1]), run(*e.args[0])))};
      case ExprOp::Ge: return {b_.not_(arith::less_signed(b_, run(*e.args[0]), run(*e.args[1])))};
      case ExprOp::Eq: return {arith::equal(b_, run(*e.args[0]), run(*e.args[1]))};
      case ExprOp::Ne: return {b_.not_(arith::equal(b_, run(*e.args[0]), run(*e.args[1])))};
      case ExprOp::And: return {b_.and_(run(*e.args[0])[0], run(*e.args[1])[0])};
      case ExprOp::Or: return {b_.or_(run(*e.args[0])[0], run(*e.args[1])[0])};
      case ExprOp::Not: return {b_.not_(run(*e.args[0])[0])};
      case ExprOp::Ite: return arith::mux(b_, run(*e.args[0])[0], run(*e.args[1]), run(*e.args[2]));
    }
    throw Error("compile: unknown operator");
  }

 private:
  Builder& b_;
  const std::map<std::string, Word>& env_;
  int h_;
};

}  // namespace

Circuit compile(const table::RowTable& t, const std::vector<ValueType>& input_types,
                const std::vector<ValueType>& output_types, int width) {
  if (width < 4 || width % 2 != 0) throw Error("compile: width must be even and at least 4");
  if (input_types.size() != t.input_names.size() || output_types.size() != t.row.functions.size())
    throw Error("compile: port types do not match " + t.label);
  const auto m = static_cast<std::size_t>(width);
  const std::size_t h = m / 2;
  Builder b(input_types.size() * m);

  std::vector<Wire> tag_ok;
  std::map<std::string, Word> env;
  for (std::size_t k = 0; k < input_types.size(); ++k) {
    const std::size_t base = k * m;
    // Tag half must read 0...01.
    for (std::size_t i = 0; i + 1 < h; ++i) tag_ok.push_back(b.not_(b.input(base + i)));
    tag_ok.push_back(b.input(base + h - 1));
    Word payload(h);
    for (std::size_t i = 0; i < h; ++i) payload[i] = b.input(base + m - 1 - i);
    if (input_types[k] == ValueType::Bool) payload.resize(1);
    env[t.input_names[k]] = std::move(payload);
  }

  ExprCompiler ec(b, env, static_cast<int>(h));
  const Wire valid = b.and_(b.and_all(std::move(tag_ok)), ec.run(*t.row.predicate)[0]);

  std::vector<Wire> outputs;
  for (std::size_t k = 0; k < output_types.size(); ++k) {
    const Word f = ec.run(*t.row.functions[k]);
    for (std::size_t i = 0; i + 1 < h; ++i) outputs.push_back(Builder::kZero);
    outputs.push_back(valid);
    for (std::size_t i = h; i-- > 0;) outputs.push_back(i < f.size() ? b.and_(valid, f[i]) : Builder::kZero);
  }
  return b.finish(outputs);
}

Circuit compile(const table::TransformedGraph& tg, std::size_t node) {
  const table::StructNode& n = tg.structure.nodes.at(node);
  std::vector<ValueType> in;
  std::vector<ValueType> out;
  for (const auto& s : n.inputs) in.push_back(s.type);
  for (const auto& s : n.outputs) out.push_back(s.type);
  return compile(tg.tables.at(node), in, out, tg.width());
}

}  // namespace tabverify::circuit
