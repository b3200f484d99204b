#include "doctest.h"
#include "tabverify/circuit.hpp"
#include "tabverify/samples.hpp"
#include "test_support.hpp"

using namespace tabverify;
using namespace tabverify::circuit;
using table::TaggedValue;
using table::ValueType;

TEST_CASE("simulate: single gates and parity") {
  Circuit c;
  c.inputs = 2;
  c.gates = {{0, 1, 0b1000}};
  c.outputs = {2};
  CHECK(simulate(c, BitVec{1, 1}) == BitVec{1});
  CHECK(simulate(c, BitVec{1, 0}) == BitVec{0});
  CHECK_THROWS(simulate(c, BitVec{1}));

  Builder b(8);
  Builder::Wire acc = b.input(0);
  for (std::size_t i = 1; i < 8; ++i) acc = b.xor_(acc, b.input(i));
  Circuit parity = b.finish({acc});
  CHECK(simulate(parity, bits_from_string("10101010")) == BitVec{0});
  CHECK(simulate(parity, bits_from_string("10101011")) == BitVec{1});
}

TEST_CASE("builder folds constants and shares structure") {
  Builder b(2);
  const auto x = b.input(0);
  const auto y = b.input(1);
  CHECK(b.and_(x, Builder::kOne) == x);
  CHECK(b.and_(x, Builder::kZero) == Builder::kZero);
  CHECK(b.xor_(x, x) == Builder::kZero);
  CHECK(b.not_(b.not_(x)) == x);
  CHECK(b.and_(x, y) == b.and_(y, x));
  CHECK(b.gate(x, y, 0b1100) == x);
  CHECK(b.and_(x, b.not_(x)) == Builder::kZero);
  Circuit c = b.finish({Builder::kOne, Builder::kZero, x});
  CHECK(simulate(c, BitVec{0, 1}) == BitVec{1, 0, 0});
}

TEST_CASE("depth counts only nonlinear gates") {
  CHECK(gate_is_nonlinear(0b1000));
  CHECK(gate_is_nonlinear(0b1110));
  CHECK_FALSE(gate_is_nonlinear(0b0110));
  CHECK_FALSE(gate_is_nonlinear(0b0011));
  Builder b(4);
  auto w = b.and_(b.input(0), b.input(1));
  w = b.xor_(w, b.input(2));
  w = b.and_(w, b.input(3));
  DepthReport r = depth(b.finish({w}));
  CHECK(r.depth == 3);
  CHECK(r.multiplicative == 2);
  CHECK(r.nonlinear_gates == 2);
}

TEST_CASE("cone and compose") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    Circuit c = testing::random_circuit(rng, 6, 30, 4);
    for (std::uint32_t k = 0; k < 4; ++k) {
      Circuit p = cone(c, std::span<const std::uint32_t>(&c.outputs[k], 1));
      for (int s = 0; s < 10; ++s) {
        BitVec x = rng.bits(6);
        CHECK(simulate(p, x)[0] == simulate(c, x)[k]);
      }
    }
    Circuit d = testing::random_circuit(rng, 4, 20, 3);
    Circuit cd = compose(c, d);
    BitVec x = rng.bits(6);
    CHECK(simulate(cd, x) == simulate(d, simulate(c, x)));
  }
  Circuit a = testing::random_circuit(rng, 3, 5, 2);
  CHECK_THROWS(compose(a, a));
}

TEST_CASE("circuit json round trip") {
  Rng rng(3);
  Circuit c = testing::random_circuit(rng, 5, 40, 3);
  CHECK(Circuit::from_json(c.to_json()) == c);
  CHECK(Circuit::from_json(c.to_json()).digest() == c.digest());
  auto j = c.to_json();
  j["gates"][0][0] = 1000;
  CHECK_THROWS_AS(Circuit::from_json(j), FormatError);
}

TEST_CASE("compile: worked example rows") {
  auto tg = table::transform(table::parse_graph(samples::worked_graph()));
  Circuit f1 = compile(tg, 0);
  CHECK(f1.inputs == 16);
  CHECK(f1.outputs.size() == 16);
  CHECK(bits_to_string(simulate(f1, TaggedValue::of(46).to_bits(16))) ==
        bits_to_string(TaggedValue::of(26).to_bits(16)));
  CHECK(simulate(f1, TaggedValue::of(30).to_bits(16)) == TaggedValue::bottom().to_bits(16));
  CHECK(simulate(f1, TaggedValue::bottom().to_bits(16)) == TaggedValue::bottom().to_bits(16));

  Circuit f7 = compile(tg, 6);
  CHECK(simulate(f7, TaggedValue::of(1).to_bits(16)) == TaggedValue::of(2).to_bits(16));
  CHECK(simulate(f7, TaggedValue::of(0).to_bits(16)) == TaggedValue::bottom().to_bits(16));

  // Every table agrees with apply_row on all tagged 8-bit inputs.
  for (std::size_t i = 0; i < tg.size(); ++i) {
    Circuit c = compile(tg, i);
    const ValueType type = tg.structure.nodes[i].inputs[0].type;
    const ValueType out_type = tg.structure.nodes[i].outputs[0].type;
    std::vector<TaggedValue> inputs{TaggedValue::bottom()};
    if (type == ValueType::Bool) {
      inputs.push_back(TaggedValue::of(0));
      inputs.push_back(TaggedValue::of(1));
    } else {
      for (int v = -128; v < 128; ++v) inputs.push_back(TaggedValue::of(v));
    }
    for (const auto& in : inputs) {
      const auto expect = table::apply_row(tg.tables[i], {in}, 8);
      CHECK(TaggedValue::from_bits(simulate(c, in.to_bits(16)), out_type) == expect[0]);
    }
  }
}

TEST_CASE("compile: identity is pass-through") {
  table::RowTable t;
  t.label = "ID";
  t.input_names = {"x"};
  t.row.predicate = table::make_const(1, ValueType::Bool);
  t.row.functions = {table::make_input("x", ValueType::Int)};
  Circuit c = compile(t, {ValueType::Int}, {ValueType::Int}, 16);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto v = TaggedValue::of(static_cast<std::int64_t>(rng.below(256)) - 128);
    CHECK(simulate(c, v.to_bits(16)) == v.to_bits(16));
  }
}

TEST_CASE("compile: random expressions match the interpreter") {
  Rng rng(20240);
  int checked = 0;
  for (int n = 0; n < 200; ++n) {
    table::RowTable t = testing::random_row(rng, 2, 4);
    Circuit c = compile(t, {ValueType::Int, ValueType::Int}, {ValueType::Int}, 16);
    for (int s = 0; s < 20; ++s) {
      std::vector<TaggedValue> in;
      BitVec x;
      for (int k = 0; k < 2; ++k) {
        const bool top = rng.below(8) != 0;
        const auto v = top ? TaggedValue::of(static_cast<std::int64_t>(rng.below(256)) - 128) : TaggedValue::bottom();
        in.push_back(v);
        const BitVec w = v.to_bits(16);
        x.insert(x.end(), w.begin(), w.end());
      }
      const auto expect = table::apply_row(t, in, 8);
      CHECK(TaggedValue::from_bits(simulate(c, x), ValueType::Int) == expect[0]);
      ++checked;
    }
  }
  CHECK(checked == 4000);
}

TEST_CASE("compile: out-of-width constant") {
  table::RowTable t;
  t.input_names = {"x"};
  t.row.predicate = table::make_const(1, ValueType::Bool);
  t.row.functions = {table::make_op(table::ExprOp::Add, {table::make_input("x", ValueType::Int),
                                                         table::make_const(300, ValueType::Int)})};
  CHECK_THROWS_AS(compile(t, {ValueType::Int}, {ValueType::Int}, 16), BudgetError);
}

TEST_CASE("universal: one slot computes AND") {
  UniversalBudget budget{2, 1, 1};
  CHECK(budget.bus_width() == 3);
  CHECK(budget.selector_bits() == 2);
  CHECK(budget.program_bits() == 1 * (2 * 2 + 4) + 1 * 2);
  UniversalCircuit u = build_universal(budget);
  Program p;
  p.slots = {{0, 1, 0b1000}};
  p.outputs = {2};
  const BitVec s = encode_slots(p, budget);
  for (int x = 0; x < 4; ++x) {
    BitVec in = s;
    in.push_back(x >> 1);
    in.push_back(x & 1);
    CHECK(simulate(u.circuit, in) == BitVec{static_cast<std::uint8_t>((x >> 1) & x & 1)});
  }
}

TEST_CASE("universal: selector validation") {
  UniversalBudget budget{2, 2, 1};
  Program p;
  p.slots = {{0, 2, 0b1000}};  // wire 2 is this slot's own output
  p.outputs = {2};
  CHECK_THROWS_AS(encode_slots(p, budget), BudgetError);
  p.slots = {{0, 1, 0b1000}};
  p.outputs = {9};
  CHECK_THROWS_AS(encode_slots(p, budget), BudgetError);
  Rng rng(1);
  Circuit big = testing::random_circuit(rng, 2, 5, 1);
  CHECK_THROWS_AS(encode_program(big, budget), BudgetError);
}

TEST_CASE("universal: random circuits and projections") {
  Rng rng(99);
  UniversalBudget budget{8, 24, 4};
  UniversalCircuit u = build_universal(budget);
  REQUIRE(u.projections.size() == 4);
  for (int n = 0; n < 100; ++n) {
    Circuit c = testing::random_circuit(rng, 1 + rng.below(8), 1 + rng.below(24), 1 + rng.below(4));
    const BitVec s = encode_program(c, budget);
    CHECK(s.size() == budget.program_bits());
    const Program decoded = decode_program(s, budget);
    CHECK(encode_slots(decoded, budget) == s);
    for (int k = 0; k < 8; ++k) {
      BitVec x = rng.bits(c.inputs);
      BitVec in = s;
      in.insert(in.end(), x.begin(), x.end());
      in.resize(s.size() + budget.input_bits, 0);
      const BitVec got = simulate(u.circuit, in);
      const BitVec want = simulate(c, x);
      for (std::size_t o = 0; o < want.size(); ++o) CHECK(got[o] == want[o]);
      for (std::size_t o = 0; o < budget.output_bits; ++o) CHECK(simulate(u.projections[o], in)[0] == got[o]);
      // Unused outputs read a padding slot.
      for (std::size_t o = want.size(); o < budget.output_bits; ++o)
        if (c.gates.size() < budget.slots) CHECK(got[o] == 0);
    }
  }
}

TEST_CASE("universal: worked example fits one budget") {
  auto tg = table::transform(table::parse_graph(samples::worked_graph()));
  std::vector<Circuit> cs;
  for (std::size_t i = 0; i < tg.size(); ++i) cs.push_back(compile(tg, i));
  UniversalBudget budget = fit_budget(cs);
  std::size_t largest = 0;
  for (const auto& c : cs) largest = std::max(largest, c.gates.size());
  CHECK(budget.slots == largest);
  CHECK(budget.input_bits == 16);
  CHECK(budget.output_bits == 16);
  UniversalCircuit u = build_universal(budget, false);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const BitVec s = encode_program(cs[i], budget);
    CHECK(s.size() == budget.program_bits());
    for (int a = -128; a < 128; a += 7) {
      const BitVec x = TaggedValue::of(a & (i >= 6 ? 1 : -1)).to_bits(16);
      BitVec in = s;
      in.insert(in.end(), x.begin(), x.end());
      CHECK(simulate(u.circuit, in) == simulate(cs[i], x));
    }
  }
  // F4 yields the constant 20 for a < 25.
  const BitVec s4 = encode_program(cs[3], budget);
  BitVec in = s4;
  const BitVec x = TaggedValue::of(10).to_bits(16);
  in.insert(in.end(), x.begin(), x.end());
  CHECK(TaggedValue::from_bits(simulate(u.circuit, in), ValueType::Int) == TaggedValue::of(20));
}
