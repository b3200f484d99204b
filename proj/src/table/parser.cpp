#include <cctype>
#include <map>
#include <set>

#include "table_internal.hpp"

namespace tabverify::table {

ParseError::ParseError(const std::string& what, int line, int column)
    : FormatError(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text.push_back(advance());
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text.push_back(advance());
          if (t.text.size() > 18) throw ParseError("integer literal too long", t.line, t.column);
        }
        t.value = std::stoll(t.text);
      } else {
        t.kind = Tok::Sym;
        static const char* two[] = {"->", "<=", ">=", "==", "!=", "&&", "||", ".."};
        for (const char* s : two) {
          if (src_.compare(pos_, 2, s) == 0) {
            t.text = s;
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          static const std::string singles = "{}[]():;,.<>=+-*!";
          if (singles.find(c) == std::string::npos)
            throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
          t.text.push_back(advance());
        }
      }
      out.push_back(t);
    }
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  TableGraph graph() {
    TableGraph g;
    std::set<std::string> table_names;
    bool width_seen = false;
    while (!at_end()) {
      const Token& t = peek();
      if (is_word("graph")) {
        next();
        g.name = ident("graph name");
        expect(";");
      } else if (is_word("width")) {
        if (width_seen) fail("duplicate width declaration", t);
        width_seen = true;
        next();
        const Token& w = next();
        if (w.kind != Tok::Int) fail("expected integer width", w);
        g.width = static_cast<int>(w.value);
        expect(";");
      } else if (is_word("input")) {
        next();
        ExternalPort p = external_port();
        if (g.find_input(p.name)) fail("duplicate external input '" + p.name + "'", t);
        g.inputs.push_back(std::move(p));
        expect(";");
      } else if (is_word("output")) {
        next();
        ExternalPort p = external_port();
        if (p.range) fail("range on external output '" + p.name + "'", t);
        if (g.find_output(p.name)) fail("duplicate external output '" + p.name + "'", t);
        g.outputs.push_back(std::move(p));
        expect(";");
      } else if (is_word("table")) {
        Table tb = table();
        if (!table_names.insert(tb.name).second)
          fail("duplicate table name '" + tb.name + "'", t);
        if (tb.name == kInputNode || tb.name == kOutputNode)
          fail("table name '" + tb.name + "' is reserved", t);
        g.tables.push_back(std::move(tb));
      } else if (is_word("edges")) {
        next();
        edges(g);
      } else {
        fail("expected declaration, got '" + t.text + "'", t);
      }
    }
    return g;
  }

  ExprPtr expression_only(const std::map<std::string, ValueType>& scope) {
    scope_ = &scope;
    ExprPtr e = expr();
    if (!at_end()) fail("trailing input after expression", peek());
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const Token& t) {
    throw ParseError(msg, t.line, t.column);
  }

  const Token& peek(std::size_t k = 0) const {
    const std::size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_sym(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_word(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
  bool accept(const char* s) {
    if (is_sym(s)) {
      next();
      return true;
    }
    return false;
  }
  void expect(const char* s) {
    if (!accept(s)) {
      const Token& t = peek();
      fail(std::string("expected '") + s + "', got '" + (t.kind == Tok::End ? "end of input" : t.text) +
               "'",
           t);
    }
  }
  void expect_word(const char* s) {
    if (!is_word(s)) fail(std::string("expected '") + s + "'", peek());
    next();
  }
  std::string ident(const char* what) {
    const Token& t = next();
    if (t.kind != Tok::Ident) fail(std::string("expected ") + what, t);
    return t.text;
  }

  ValueType type() {
    const Token& t = next();
    if (t.kind == Tok::Ident && t.text == "int") return ValueType::Int;
    if (t.kind == Tok::Ident && t.text == "bool") return ValueType::Bool;
    fail("expected type 'int' or 'bool'", t);
  }

  std::int64_t signed_int() {
    const bool neg = accept("-");
    const Token& t = next();
    if (t.kind != Tok::Int) fail("expected integer", t);
    return neg ? -t.value : t.value;
  }

  ExternalPort external_port() {
    ExternalPort p;
    p.name = ident("port name");
    expect(":");
    p.type = type();
    if (accept("[")) {
      const Token& at = peek();
      Range r;
      r.lo = signed_int();
      expect("..");
      r.hi = signed_int();
      expect("]");
      if (r.lo > r.hi) fail("empty range", at);
      if (p.type == ValueType::Bool && (r.lo < 0 || r.hi > 1)) fail("bool range outside [0..1]", at);
      p.range = r;
    }
    return p;
  }

  std::vector<Port> port_list() {
    std::vector<Port> ports;
    std::set<std::string> seen;
    do {
      const Token& at = peek();
      Port p;
      p.name = ident("port name");
      expect(":");
      p.type = type();
      if (!seen.insert(p.name).second) fail("duplicate port '" + p.name + "'", at);
      ports.push_back(std::move(p));
    } while (accept(","));
    return ports;
  }

  Table table() {
    expect_word("table");
    Table tb;
    tb.name = ident("table name");
    expect("{");
    expect_word("inputs");
    expect(":");
    tb.inputs = port_list();
    expect(";");
    expect_word("outputs");
    expect(":");
    tb.outputs = port_list();
    for (const auto& o : tb.outputs)
      if (tb.find_input(o.name)) fail("port '" + o.name + "' is both input and output", peek());
    expect(";");
    expect_word("rows");
    expect(":");
    expect("[");
    std::map<std::string, ValueType> scope;
    for (const auto& p : tb.inputs) scope[p.name] = p.type;
    scope_ = &scope;
    if (!is_sym("]")) {
      do tb.rows.push_back(row(tb));
      while (accept(","));
    }
    expect("]");
    accept(";");
    expect("}");
    scope_ = nullptr;
    if (tb.rows.empty()) throw FormatError("table '" + tb.name + "' has no rows");
    return tb;
  }

  Row row(const Table& tb) {
    const Token& at = peek();
    expect("(");
    Row r;
    r.predicate = expr();
    if (r.predicate->type != ValueType::Bool) fail("row predicate must be bool", at);
    while (accept(",")) {
      const Token& ft = peek();
      ExprPtr f = expr();
      const std::size_t k = r.functions.size();
      if (k >= tb.outputs.size()) fail("row has more functions than outputs", ft);
      if (f->type != tb.outputs[k].type)
        fail("function for output '" + tb.outputs[k].name + "' has type " + to_string(f->type), ft);
      r.functions.push_back(std::move(f));
    }
    expect(")");
    if (r.functions.size() != tb.outputs.size()) fail("row has fewer functions than outputs", at);
    return r;
  }

  Endpoint endpoint() {
    Endpoint e;
    e.node = ident("node name");
    expect(".");
    e.port = ident("port name");
    return e;
  }

  void edge(TableGraph& g) {
    Edge e;
    e.from = endpoint();
    expect("->");
    e.to = endpoint();
    g.edges.push_back(std::move(e));
  }

  void edges(TableGraph& g) {
    if (accept("{")) {
      while (!accept("}")) {
        edge(g);
        expect(";");
      }
      return;
    }
    expect(":");
    do edge(g);
    while (accept(","));
    expect(";");
  }

  // Expression grammar, lowest precedence first.
  ExprPtr expr() {
    if (is_word("if")) {
      const Token& at = next();
      ExprPtr c = expr();
      expect_word("then");
      ExprPtr a = expr();
      expect_word("else");
      ExprPtr b = expr();
      return build(ExprOp::Ite, {c, a, b}, at);
    }
    return disjunction();
  }

  ExprPtr build(ExprOp op, std::vector<ExprPtr> args, const Token& at) {
    try {
      return make_op(op, std::move(args));
    } catch (const ParseError&) {
      throw;
    } catch (const FormatError& e) {
      fail(e.what(), at);
    }
  }

  ExprPtr disjunction() {
    ExprPtr l = conjunction();
    for (;;) {
      const Token& at = peek();
      if (accept("||") || (is_word("or") && (next(), true)))
        l = build(ExprOp::Or, {l, conjunction()}, at);
      else
        return l;
    }
  }

  ExprPtr conjunction() {
    ExprPtr l = negation();
    for (;;) {
      const Token& at = peek();
      if (accept("&&") || (is_word("and") && (next(), true)))
        l = build(ExprOp::And, {l, negation()}, at);
      else
        return l;
    }
  }

  ExprPtr negation() {
    const Token& at = peek();
    if (accept("!") || (is_word("not") && (next(), true))) return build(ExprOp::Not, {negation()}, at);
    return comparison();
  }

  bool comparison_op(ExprOp& op) {
    if (peek().kind != Tok::Sym) return false;
    static const std::map<std::string, ExprOp> ops = {
        {"<", ExprOp::Lt},  {"<=", ExprOp::Le}, {"=", ExprOp::Eq}, {"==", ExprOp::Eq},
        {"!=", ExprOp::Ne}, {">", ExprOp::Gt},  {">=", ExprOp::Ge}};
    auto it = ops.find(peek().text);
    if (it == ops.end()) return false;
    op = it->second;
    next();
    return true;
  }

  // Chained comparisons a < b <= c read as (a < b) && (b <= c).
  ExprPtr comparison() {
    ExprPtr l = additive();
    ExprPtr result;
    ExprOp op;
    for (;;) {
      const Token& at = peek();
      if (!comparison_op(op)) break;
      ExprPtr r = additive();
      ExprPtr c = build(op, {l, r}, at);
      result = result ? build(ExprOp::And, {result, c}, at) : c;
      l = r;
    }
    return result ? result : l;
  }

  ExprPtr additive() {
    ExprPtr l = multiplicative();
    for (;;) {
      const Token& at = peek();
      if (accept("+"))
        l = build(ExprOp::Add, {l, multiplicative()}, at);
      else if (accept("-"))
        l = build(ExprOp::Sub, {l, multiplicative()}, at);
      else
        return l;
    }
  }

  ExprPtr multiplicative() {
    ExprPtr l = unary();
    for (;;) {
      const Token& at = peek();
      if (accept("*"))
        l = build(ExprOp::Mul, {l, unary()}, at);
      else if (is_sym("/"))
        fail("division is not supported", at);
      else
        return l;
    }
  }

  ExprPtr unary() {
    const Token& at = peek();
    if (accept("-")) {
      ExprPtr a = unary();
      if (a->op == ExprOp::Const && a->type == ValueType::Int) return make_const(-a->value, ValueType::Int);
      return build(ExprOp::Neg, {a}, at);
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = next();
    if (t.kind == Tok::Int) return make_const(t.value, ValueType::Int);
    if (t.kind == Tok::Sym && t.text == "(") {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "True") return make_const(1, ValueType::Bool);
      if (t.text == "false" || t.text == "False") return make_const(0, ValueType::Bool);
      if (!scope_) fail("identifier outside table scope", t);
      auto it = scope_->find(t.text);
      if (it == scope_->end()) fail("undeclared input '" + t.text + "'", t);
      return make_input(t.text, it->second);
    }
    fail("expected expression, got '" + (t.kind == Tok::End ? std::string("end of input") : t.text) + "'",
         t);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const std::map<std::string, ValueType>* scope_ = nullptr;
};

}  // namespace

TableGraph parse_graph(const std::string& text) {
  Parser p(Lexer(text).run());
  TableGraph g = p.graph();
  validate(g);
  return g;
}

ExprPtr parse_expr(const std::string& text, const std::map<std::string, ValueType>& scope) {
  Parser p(Lexer(text).run());
  return p.expression_only(scope);
}

}  // namespace tabverify::table
