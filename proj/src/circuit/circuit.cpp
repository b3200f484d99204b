#include <algorithm>

#include "tabverify/circuit.hpp"

namespace tabverify::circuit {

void Circuit::check() const {
  for (std::size_t j = 0; j < gates.size(); ++j) {
    const std::size_t limit = inputs + j;
    if (gates[j].a >= limit || gates[j].b >= limit)
      throw FormatError("gate " + std::to_string(j) + " reads a wire that is not yet defined");
    if (gates[j].tt > 15) throw FormatError("gate " + std::to_string(j) + " has an invalid truth table");
  }
  for (auto o : outputs)
    if (o >= wire_count()) throw FormatError("output wire " + std::to_string(o) + " out of range");
}

nlohmann::json Circuit::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& gate : gates) g.push_back({gate.a, gate.b, gate.tt});
  return {{"inputs", inputs}, {"gates", g}, {"outputs", outputs}};
}

Circuit Circuit::from_json(const nlohmann::json& j) {
  try {
    Circuit c;
    c.inputs = j.at("inputs").get<std::size_t>();
    for (const auto& g : j.at("gates"))
      c.gates.push_back({g.at(0).get<std::uint32_t>(), g.at(1).get<std::uint32_t>(), g.at(2).get<std::uint8_t>()});
    c.outputs = j.at("outputs").get<std::vector<std::uint32_t>>();
    c.check();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed circuit: ") + e.what());
  }
}

std::string Circuit::digest() const {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + gates.size() * 9 + outputs.size() * 4);
  auto put32 = [&](std::uint64_t v) {
    for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<std::uint8_t>(v >> s));
  };
  put32(inputs);
  put32(gates.size());
  for (const auto& g : gates) {
    put32(g.a);
    put32(g.b);
    buf.push_back(g.tt);
  }
  put32(outputs.size());
  for (auto o : outputs) put32(o);
  return to_hex(sha256(buf));
}

BitVec simulate(const Circuit& c, std::span<const std::uint8_t> x) {
  if (x.size() != c.inputs)
    throw Error("simulate: expected " + std::to_string(c.inputs) + " input bits, got " + std::to_string(x.size()));
  BitVec w(c.wire_count());
  std::copy(x.begin(), x.end(), w.begin());
  std::size_t k = c.inputs;
  for (const auto& g : c.gates) w[k++] = gate_output(g.tt, w[g.a] & 1u, w[g.b] & 1u);
  BitVec out;
  out.reserve(c.outputs.size());
  for (auto o : c.outputs) out.push_back(w[o]);
  return out;
}

DepthReport depth(const Circuit& c) {
  DepthReport r;
  std::vector<int> d(c.wire_count(), 0);
  std::vector<int> md(c.wire_count(), 0);
  std::size_t k = c.inputs;
  for (const auto& g : c.gates) {
    const bool nl = gate_is_nonlinear(g.tt);
    d[k] = std::max(d[g.a], d[g.b]) + 1;
    md[k] = std::max(md[g.a], md[g.b]) + (nl ? 1 : 0);
    r.nonlinear_gates += nl;
    ++k;
  }
  for (auto o : c.outputs) {
    r.depth = std::max(r.depth, d[o]);
    r.multiplicative = std::max(r.multiplicative, md[o]);
  }
  return r;
}

Circuit cone(const Circuit& c, std::span<const std::uint32_t> outputs) {
  std::vector<char> need(c.wire_count(), 0);
  for (auto o : outputs) need.at(o) = 1;
  for (std::size_t j = c.gates.size(); j-- > 0;) {
    if (!need[c.inputs + j]) continue;
    need[c.gates[j].a] = 1;
    need[c.gates[j].b] = 1;
  }
  Circuit out;
  out.inputs = c.inputs;
  std::vector<std::uint32_t> remap(c.wire_count());
  for (std::size_t i = 0; i < c.inputs; ++i) remap[i] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j < c.gates.size(); ++j) {
    if (!need[c.inputs + j]) continue;
    const Gate& g = c.gates[j];
    remap[c.inputs + j] = static_cast<std::uint32_t>(out.wire_count());
    out.gates.push_back({remap[g.a], remap[g.b], g.tt});
  }
  for (auto o : outputs) out.outputs.push_back(remap[o]);
  return out;
}

Circuit compose(const Circuit& first, const Circuit& second) {
  if (first.outputs.size() != second.inputs)
    throw Error("compose: output width " + std::to_string(first.outputs.size()) + " differs from input width " +
                std::to_string(second.inputs));
  Circuit out;
  out.inputs = first.inputs;
  out.gates = first.gates;
  std::vector<std::uint32_t> remap(second.wire_count());
  for (std::size_t i = 0; i < second.inputs; ++i) remap[i] = first.outputs[i];
  for (std::size_t j = 0; j < second.gates.size(); ++j) {
    const Gate& g = second.gates[j];
    remap[second.inputs + j] = static_cast<std::uint32_t>(out.wire_count());
    out.gates.push_back({remap[g.a], remap[g.b], g.tt});
  }
  for (auto o : second.outputs) out.outputs.push_back(remap[o]);
  return out;
}

// ---------------------------------------------------------------------------

Builder::Builder(std::size_t inputs) : inputs_(inputs) {}

Builder::Wire Builder::input(std::size_t i) const {
  if (i >= inputs_) throw Error("Builder::input: index out of range");
  return static_cast<Wire>(i);
}

Builder::Wire Builder::emit(Wire a, Wire b, std::uint8_t tt) {
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 34) | (static_cast<std::uint64_t>(b) << 4) | tt;
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const Wire w = static_cast<Wire>(inputs_ + gates_.size());
  gates_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), tt});
  cache_.emplace(key, w);
  return w;
}

Builder::Wire Builder::not_(Wire a) {
  if (a == kZero) return kOne;
  if (a == kOne) return kZero;
  if (auto it = negation_.find(a); it != negation_.end()) return it->second;
  const Wire w = emit(a, a, 0b0011);
  negation_[w] = a;
  negation_[a] = w;
  return w;
}

Builder::Wire Builder::unary(Wire a, bool f0, bool f1) {
  if (f0 == f1) return constant(f0);
  return f1 ? a : not_(a);
}

Builder::Wire Builder::gate(Wire a, Wire b, std::uint8_t tt) {
  tt &= 0xF;
  const auto f = [tt](bool x, bool y) { return gate_output(tt, x, y); };
  if (is_constant(a) && is_constant(b)) return constant(f(a == kOne, b == kOne));
  if (is_constant(a)) return unary(b, f(a == kOne, false), f(a == kOne, true));
  if (is_constant(b)) return unary(a, f(false, b == kOne), f(true, b == kOne));
  if (a == b) return unary(a, f(false, false), f(true, true));
  if (auto it = negation_.find(a); it != negation_.end() && it->second == b)
    return unary(a, f(false, true), f(true, false));
  const bool uses_a = f(false, false) != f(true, false) || f(false, true) != f(true, true);
  const bool uses_b = f(false, false) != f(false, true) || f(true, false) != f(true, true);
  if (!uses_a && !uses_b) return constant(f(false, false));
  if (!uses_a) return unary(b, f(false, false), f(false, true));
  if (!uses_b) return unary(a, f(false, false), f(true, false));
  if (a > b) {
    std::swap(a, b);
    tt = static_cast<std::uint8_t>((tt & 0b1001) | ((tt & 0b0010) << 1) | ((tt & 0b0100) >> 1));
  }
  return emit(a, b, tt);
}

Builder::Wire Builder::mux(Wire s, Wire x, Wire y) {
  if (x == y) return x;
  if (s == kOne) return x;
  if (s == kZero) return y;
  if (y == kZero) return and_(s, x);
  if (x == kZero) return gate(s, y, 0b0010);
  if (x == kOne) return or_(s, y);
  if (y == kOne) return gate(s, x, 0b1011);
  return xor_(y, and_(s, xor_(x, y)));
}

Builder::Wire Builder::and_all(std::vector<Wire> ws) {
  if (ws.empty()) return kOne;
  while (ws.size() > 1) {
    std::vector<Wire> next;
    for (std::size_t i = 0; i + 1 < ws.size(); i += 2) next.push_back(and_(ws[i], ws[i + 1]));
    if (ws.size() % 2) next.push_back(ws.back());
    ws = std::move(next);
  }
  return ws[0];
}

Builder::Wire Builder::select(std::span<const Wire> index, std::span<const Wire> options) {
  struct Rec {
    Builder& b;
    std::span<const Wire> index;
    std::span<const Wire> options;
    Wire go(std::size_t p, std::size_t lo) {
      if (lo >= options.size()) return kZero;
      if (p == index.size()) return options[lo];
      const std::size_t half = std::size_t{1} << (index.size() - p - 1);
      const Wire hi_w = go(p + 1, lo + half);
      const Wire lo_w = go(p + 1, lo);
      return b.mux(index[p], hi_w, lo_w);
    }
  };
  return Rec{*this, index, options}.go(0, 0);
}

Circuit Builder::finish(const std::vector<Wire>& outputs) {
  Circuit c;
  c.inputs = inputs_;
  c.gates = gates_;
  for (Wire w : outputs) {
    if (is_constant(w)) {
      if (inputs_ == 0) throw Error("Builder::finish: constant output needs at least one input");
      c.outputs.push_back(static_cast<std::uint32_t>(c.wire_count()));
      c.gates.push_back({0, 0, static_cast<std::uint8_t>(w == kOne ? 0b1111 : 0b0000)});
    } else {
      c.outputs.push_back(static_cast<std::uint32_t>(w));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace arith {

using Wire = Builder::Wire;

Word constant(std::int64_t v, int bits) {
  Word w(static_cast<std::size_t>(bits));
  for (int i = 0; i < bits; ++i) w[static_cast<std::size_t>(i)] = Builder::constant(((v >> std::min(i, 63)) & 1) != 0);
  return w;
}

namespace {

Word add_carry(Builder& b, const Word& x, const Word& y, Wire carry) {
  Word out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Wire t = b.xor_(x[i], y[i]);
    out[i] = b.xor_(t, carry);
    if (i + 1 < x.size()) carry = b.xor_(b.and_(x[i], y[i]), b.and_(carry, t));
  }
  return out;
}

Word invert(Builder& b, const Word& x) {
  Word out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = b.not_(x[i]);
  return out;
}

}  // namespace

Word add(Builder& b, const Word& x, const Word& y) { return add_carry(b, x, y, Builder::kZero); }

Word sub(Builder& b, const Word& x, const Word& y) { return add_carry(b, x, invert(b, y), Builder::kOne); }

Word neg(Builder& b, const Word& x) { return sub(b, constant(0, static_cast<int>(x.size())), x); }

Word mul(Builder& b, const Word& x, const Word& y) {
  Word acc = constant(0, static_cast<int>(x.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    Word partial(x.size(), Builder::kZero);
    for (std::size_t k = i; k < x.size(); ++k) partial[k] = b.and_(y[i], x[k - i]);
    acc = add(b, acc, partial);
  }
  return acc;
}

Wire equal(Builder& b, const Word& x, const Word& y) {
  std::vector<Wire> bits;
  for (std::size_t i = 0; i < x.size(); ++i) bits.push_back(b.xnor_(x[i], y[i]));
  return b.and_all(std::move(bits));
}

Wire less_signed(Builder& b, const Word& x, const Word& y) {
  Word xe = x;
  Word ye = y;
  xe.push_back(x.back());
  ye.push_back(y.back());
  return sub(b, xe, ye).back();
}

Word mux(Builder& b, Wire s, const Word& x, const Word& y) {
  Word out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = b.mux(s, x[i], y[i]);
  return out;
}

}  // namespace arith

}  // namespace tabverify::circuit
