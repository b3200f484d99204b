#include <algorithm>
#include <sstream>

#include "tabverify/table.hpp"

namespace tabverify::table {

std::string to_string(ValueType t) { return t == ValueType::Int ? "int" : "bool"; }

ExprPtr make_const(std::int64_t value, ValueType type) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Const;
  e->type = type;
  e->value = type == ValueType::Bool ? (value != 0 ? 1 : 0) : value;
  return e;
}

ExprPtr make_input(std::string name, ValueType type) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Input;
  e->type = type;
  e->name = std::move(name);
  return e;
}

namespace {

const char* op_symbol(ExprOp op) {
  switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Eq: return "==";
    case ExprOp::Ne: return "!=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::And: return "&&";
    case ExprOp::Or: return "||";
    default: return "?";
  }
}

void require_arity(ExprOp op, const std::vector<ExprPtr>& args, std::size_t n) {
  if (args.size() != n)
    throw FormatError(std::string("operator ") + op_symbol(op) + " expects " + std::to_string(n) +
                      " operands");
  for (const auto& a : args)
    if (!a) throw FormatError("null operand");
}

void require_type(const ExprPtr& e, ValueType t, const char* what) {
  if (e->type != t)
    throw FormatError(std::string(what) + " expects " + to_string(t) + " operand, got " +
                      to_string(e->type));
}

}  // namespace

ExprPtr make_op(ExprOp op, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  switch (op) {
    case ExprOp::Const:
    case ExprOp::Input:
      throw FormatError("make_op: leaf operator");
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
      require_arity(op, args, 2);
      require_type(args[0], ValueType::Int, "arithmetic");
      require_type(args[1], ValueType::Int, "arithmetic");
      e->type = ValueType::Int;
      break;
    case ExprOp::Neg:
      require_arity(op, args, 1);
      require_type(args[0], ValueType::Int, "negation");
      e->type = ValueType::Int;
      break;
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge:
      require_arity(op, args, 2);
      require_type(args[0], ValueType::Int, "ordering");
      require_type(args[1], ValueType::Int, "ordering");
      e->type = ValueType::Bool;
      break;
    case ExprOp::Eq:
    case ExprOp::Ne:
      require_arity(op, args, 2);
      if (args[0]->type != args[1]->type) throw FormatError("equality between int and bool");
      e->type = ValueType::Bool;
      break;
    case ExprOp::And:
    case ExprOp::Or:
      require_arity(op, args, 2);
      require_type(args[0], ValueType::Bool, "logical operator");
      require_type(args[1], ValueType::Bool, "logical operator");
      e->type = ValueType::Bool;
      break;
    case ExprOp::Not:
      require_arity(op, args, 1);
      require_type(args[0], ValueType::Bool, "negation");
      e->type = ValueType::Bool;
      break;
    case ExprOp::Ite:
      require_arity(op, args, 3);
      require_type(args[0], ValueType::Bool, "if condition");
      if (args[1]->type != args[2]->type) throw FormatError("if branches have different types");
      e->type = args[1]->type;
      break;
  }
  e->args = std::move(args);
  return e;
}

namespace {

int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Ite: return 0;
    case ExprOp::Or: return 1;
    case ExprOp::And: return 2;
    case ExprOp::Not: return 3;
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Gt:
    case ExprOp::Ge: return 4;
    case ExprOp::Add:
    case ExprOp::Sub: return 5;
    case ExprOp::Mul: return 6;
    case ExprOp::Neg: return 7;
    default: return 8;
  }
}

void print(std::ostream& os, const Expr& e, int outer) {
  const int p = precedence(e.op);
  const bool paren = p < outer;
  if (paren) os << '(';
  switch (e.op) {
    case ExprOp::Const:
      if (e.type == ValueType::Bool)
        os << (e.value ? "true" : "false");
      else if (e.value < 0)
        os << "(" << e.value << ")";
      else
        os << e.value;
      break;
    case ExprOp::Input: os << e.name; break;
    case ExprOp::Neg:
      os << '-';
      print(os, *e.args[0], p + 1);
      break;
    case ExprOp::Not:
      os << '!';
      print(os, *e.args[0], p + 1);
      break;
    case ExprOp::Ite:
      os << "if ";
      print(os, *e.args[0], 1);
      os << " then ";
      print(os, *e.args[1], 1);
      os << " else ";
      print(os, *e.args[2], 0);
      break;
    default:
      // Left-associative binary operators; comparisons are non-associative.
      print(os, *e.args[0], p == 4 ? p + 1 : p);
      os << ' ' << op_symbol(e.op) << ' ';
      print(os, *e.args[1], p + 1);
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

std::int64_t wrap_signed(std::int64_t v, int bits) {
  if (bits >= 64) return v;
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
  if (u >> (bits - 1)) u |= ~mask;
  return static_cast<std::int64_t>(u);
}

std::int64_t evaluate(const Expr& e, const Env& env, int payload_bits) {
  auto arg = [&](std::size_t i) { return evaluate(*e.args[i], env, payload_bits); };
  switch (e.op) {
    case ExprOp::Const: return e.type == ValueType::Int ? wrap_signed(e.value, payload_bits) : e.value;
    case ExprOp::Input: {
      auto it = env.find(e.name);
      if (it == env.end()) throw Error("unbound input '" + e.name + "'");
      return e.type == ValueType::Int ? wrap_signed(it->second, payload_bits) : (it->second & 1);
    }
    case ExprOp::Add: return wrap_signed(arg(0) + arg(1), payload_bits);
    case ExprOp::Sub: return wrap_signed(arg(0) - arg(1), payload_bits);
    case ExprOp::Mul:
      return wrap_signed(static_cast<std::int64_t>(static_cast<std::uint64_t>(arg(0)) *
                                                   static_cast<std::uint64_t>(arg(1))),
                         payload_bits);
    case ExprOp::Neg: return wrap_signed(-arg(0), payload_bits);
    case ExprOp::Lt: return arg(0) < arg(1);
    case ExprOp::Le: return arg(0) <= arg(1);
    case ExprOp::Eq: return arg(0) == arg(1);
    case ExprOp::Ne: return arg(0) != arg(1);
    case ExprOp::Gt: return arg(0) > arg(1);
    case ExprOp::Ge: return arg(0) >= arg(1);
    case ExprOp::And: return arg(0) && arg(1);
    case ExprOp::Or: return arg(0) || arg(1);
    case ExprOp::Not: return !arg(0);
    case ExprOp::Ite: return arg(0) ? arg(1) : arg(2);
  }
  return 0;
}

void collect_inputs(const Expr& e, std::vector<std::string>& names) {
  if (e.op == ExprOp::Input) {
    if (std::find(names.begin(), names.end(), e.name) == names.end()) names.push_back(e.name);
    return;
  }
  for (const auto& a : e.args) collect_inputs(*a, names);
}

}  // namespace tabverify::table
