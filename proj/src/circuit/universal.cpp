#include <algorithm>

#include "tabverify/circuit.hpp"

namespace tabverify::circuit {

std::size_t UniversalBudget::selector_bits() const {
  std::size_t bits = 1;
  while ((std::size_t{1} << bits) < bus_width()) ++bits;
  return bits;
}

std::size_t UniversalBudget::program_bits() const {
  const std::size_t s = selector_bits();
  return slots * (2 * s + 4) + output_bits * s;
}

nlohmann::json UniversalBudget::to_json() const {
  return {{"input_bits", input_bits}, {"slots", slots}, {"output_bits", output_bits}};
}

UniversalBudget UniversalBudget::from_json(const nlohmann::json& j) {
  try {
    UniversalBudget u;
    u.input_bits = j.at("input_bits").get<std::size_t>();
    u.slots = j.at("slots").get<std::size_t>();
    u.output_bits = j.at("output_bits").get<std::size_t>();
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed universal budget: ") + e.what());
  }
}

UniversalCircuit build_universal(const UniversalBudget& budget, bool with_projections) {
  if (budget.input_bits == 0) throw BudgetError("universal circuit needs at least one input bit");
  if (budget.output_bits == 0) throw BudgetError("universal circuit needs at least one output bit");
  const std::size_t sb = budget.selector_bits();
  const std::size_t p = budget.program_bits();
  Builder b(p + budget.input_bits);

  std::vector<Builder::Wire> bus;
  bus.reserve(budget.bus_width());
  for (std::size_t i = 0; i < budget.input_bits; ++i) bus.push_back(b.input(p + i));

  std::size_t pos = 0;
  auto take = [&](std::size_t n) {
    std::vector<Builder::Wire> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(b.input(pos++));
    return w;
  };
  for (std::size_t j = 0; j < budget.slots; ++j) {
    const auto sel_a = take(sb);
    const auto sel_b = take(sb);
    const auto t = take(4);  // tt bits 3..0
    const auto x = b.select(sel_a, bus);
    const auto y = b.select(sel_b, bus);
    const auto hi = b.mux(y, t[0], t[1]);
    const auto lo = b.mux(y, t[2], t[3]);
    bus.push_back(b.mux(x, hi, lo));
  }
  std::vector<Builder::Wire> outs;
  for (std::size_t k = 0; k < budget.output_bits; ++k) outs.push_back(b.select(take(sb), bus));

  UniversalCircuit u;
  u.budget = budget;
  u.circuit = b.finish(outs);
  if (with_projections) {
    for (std::size_t k = 0; k < budget.output_bits; ++k) {
      const std::uint32_t o = u.circuit.outputs[k];
      u.projections.push_back(cone(u.circuit, std::span<const std::uint32_t>(&o, 1)));
    }
  }
  return u;
}

BitVec encode_slots(const Program& prog, const UniversalBudget& u) {
  if (prog.slots.size() > u.slots)
    throw BudgetError("program uses " + std::to_string(prog.slots.size()) + " slots, budget is " +
                      std::to_string(u.slots));
  if (prog.outputs.size() > u.output_bits)
    throw BudgetError("program has " + std::to_string(prog.outputs.size()) + " outputs, budget is " +
                      std::to_string(u.output_bits));
  const std::size_t sb = u.selector_bits();
  BitVec bits;
  bits.reserve(u.program_bits());
  auto put = [&](std::uint64_t v, std::size_t n) {
    const BitVec w = uint_to_bits(v, n);
    bits.insert(bits.end(), w.begin(), w.end());
  };
  for (std::size_t j = 0; j < u.slots; ++j) {
    ProgramSlot s;  // padding slot: constant 0 from wire 0
    if (j < prog.slots.size()) s = prog.slots[j];
    const std::size_t avail = u.input_bits + j;
    if (s.a >= avail || s.b >= avail)
      throw BudgetError("slot " + std::to_string(j) + " selects wire " + std::to_string(std::max(s.a, s.b)) +
                        " but only " + std::to_string(avail) + " are available");
    if (s.tt > 15) throw BudgetError("slot " + std::to_string(j) + " has an invalid truth table");
    put(s.a, sb);
    put(s.b, sb);
    put(s.tt, 4);
  }
  // Unused outputs read a padding slot when one exists.
  const std::size_t pad = prog.slots.size() < u.slots ? u.input_bits + prog.slots.size() : 0;
  for (std::size_t k = 0; k < u.output_bits; ++k) {
    const std::size_t o = k < prog.outputs.size() ? prog.outputs[k] : pad;
    if (o >= u.bus_width())
      throw BudgetError("output selector " + std::to_string(o) + " exceeds bus width " + std::to_string(u.bus_width()));
    put(o, sb);
  }
  return bits;
}

BitVec encode_program(const Circuit& c, const UniversalBudget& u) {
  c.check();
  if (c.inputs > u.input_bits)
    throw BudgetError("circuit has " + std::to_string(c.inputs) + " inputs, budget is " + std::to_string(u.input_bits));
  if (c.gates.size() > u.slots)
    throw BudgetError("circuit has " + std::to_string(c.gates.size()) + " gates, budget is " + std::to_string(u.slots));
  auto bus_index = [&](std::size_t w) { return w < c.inputs ? w : u.input_bits + (w - c.inputs); };
  Program p;
  for (const auto& g : c.gates) p.slots.push_back({bus_index(g.a), bus_index(g.b), g.tt});
  for (auto o : c.outputs) p.outputs.push_back(bus_index(o));
  return encode_slots(p, u);
}

Program decode_program(std::span<const std::uint8_t> bits, const UniversalBudget& u) {
  if (bits.size() != u.program_bits())
    throw FormatError("program string has " + std::to_string(bits.size()) + " bits, expected " +
                      std::to_string(u.program_bits()));
  const std::size_t sb = u.selector_bits();
  std::size_t pos = 0;
  auto get = [&](std::size_t n) {
    const std::uint64_t v = bits_to_uint(bits.subspan(pos, n));
    pos += n;
    return v;
  };
  Program p;
  for (std::size_t j = 0; j < u.slots; ++j) {
    ProgramSlot s;
    s.a = get(sb);
    s.b = get(sb);
    s.tt = static_cast<std::uint8_t>(get(4));
    p.slots.push_back(s);
  }
  for (std::size_t k = 0; k < u.output_bits; ++k) p.outputs.push_back(get(sb));
  return p;
}

UniversalBudget fit_budget(const std::vector<Circuit>& circuits) {
  UniversalBudget u;
  for (const auto& c : circuits) {
    u.input_bits = std::max(u.input_bits, c.inputs);
    u.slots = std::max(u.slots, c.gates.size());
    u.output_bits = std::max(u.output_bits, c.outputs.size());
  }
  return u;
}

}  // namespace tabverify::circuit
