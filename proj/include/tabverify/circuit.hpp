#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tabverify/common.hpp"
#include "tabverify/table.hpp"

namespace tabverify::circuit {

// Two-input gate; bit (2*a + b) of tt is the output for inputs (a, b).
struct Gate {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint8_t tt = 0;
  bool operator==(const Gate&) const = default;
};

inline bool gate_output(std::uint8_t tt, bool a, bool b) { return (tt >> (2 * a + b)) & 1u; }

// ANF coefficient of a*b; gates with it set are the multiplicative ones.
inline bool gate_is_nonlinear(std::uint8_t tt) {
  return ((tt ^ (tt >> 1) ^ (tt >> 2) ^ (tt >> 3)) & 1u) != 0;
}

// Wires 0..inputs-1 are circuit inputs; wire inputs+j is the output of gate j.
struct Circuit {
  std::size_t inputs = 0;
  std::vector<Gate> gates;
  std::vector<std::uint32_t> outputs;

  std::size_t wire_count() const { return inputs + gates.size(); }
  // Throws FormatError unless every gate reads inputs or earlier gates.
  void check() const;

  nlohmann::json to_json() const;
  static Circuit from_json(const nlohmann::json& j);
  std::string digest() const;  // sha256 of the canonical serialization

  bool operator==(const Circuit&) const = default;
};

BitVec simulate(const Circuit& c, std::span<const std::uint8_t> x);

struct DepthReport {
  int depth = 0;             // longest gate path
  int multiplicative = 0;    // nonlinear gates on the longest such path
  std::size_t nonlinear_gates = 0;
};
DepthReport depth(const Circuit& c);

// Sub-circuit computing only the selected outputs.
Circuit cone(const Circuit& c, std::span<const std::uint32_t> outputs);

// Sequential composition: outputs of `first` feed the inputs of `second`.
Circuit compose(const Circuit& first, const Circuit& second);

// Circuit builder with constant folding and structural hashing.
class Builder {
 public:
  // Wire handle; the two negative values are the constants.
  using Wire = std::int64_t;
  static constexpr Wire kZero = -1;
  static constexpr Wire kOne = -2;

  explicit Builder(std::size_t inputs);

  Wire input(std::size_t i) const;
  static Wire constant(bool v) { return v ? kOne : kZero; }
  static bool is_constant(Wire w) { return w < 0; }

  Wire gate(Wire a, Wire b, std::uint8_t tt);
  Wire not_(Wire a);
  Wire and_(Wire a, Wire b) { return gate(a, b, 0b1000); }
  Wire or_(Wire a, Wire b) { return gate(a, b, 0b1110); }
  Wire xor_(Wire a, Wire b) { return gate(a, b, 0b0110); }
  Wire xnor_(Wire a, Wire b) { return gate(a, b, 0b1001); }
  // Balanced conjunction; kOne for an empty list.
  Wire and_all(std::vector<Wire> ws);
  // s ? x : y
  Wire mux(Wire s, Wire x, Wire y);
  // Selects options[index] where index is given MSB first; missing options read as 0.
  Wire select(std::span<const Wire> index_msb_first, std::span<const Wire> options);

  std::size_t gate_count() const { return gates_.size(); }
  // Constant outputs are materialized as a gate on input 0.
  Circuit finish(const std::vector<Wire>& outputs);

 private:
  Wire unary(Wire a, bool f0, bool f1);
  Wire emit(Wire a, Wire b, std::uint8_t tt);

  std::size_t inputs_;
  std::vector<Gate> gates_;
  std::unordered_map<std::uint64_t, Wire> cache_;
  std::unordered_map<Wire, Wire> negation_;
};

// Fixed-width integer helpers over little-endian (LSB first) wire vectors.
namespace arith {
using Word = std::vector<Builder::Wire>;
Word constant(std::int64_t v, int bits);
Word add(Builder& b, const Word& x, const Word& y);
Word sub(Builder& b, const Word& x, const Word& y);
Word neg(Builder& b, const Word& x);
Word mul(Builder& b, const Word& x, const Word& y);
Builder::Wire equal(Builder& b, const Word& x, const Word& y);
Builder::Wire less_signed(Builder& b, const Word& x, const Word& y);
Word mux(Builder& b, Builder::Wire s, const Word& x, const Word& y);
}  // namespace arith

// Compiles the tagged-value function of a single-row table. Input word k
// occupies bits [k*m, (k+1)*m); output words follow the table's output ports.
// Throws BudgetError if an int constant does not fit m/2 bits.
Circuit compile(const table::RowTable& t, const std::vector<table::ValueType>& input_types,
                const std::vector<table::ValueType>& output_types, int width);
Circuit compile(const table::TransformedGraph& tg, std::size_t node);

// Gate-slot universal circuit.
struct UniversalBudget {
  std::size_t input_bits = 0;   // n_x
  std::size_t slots = 0;        // g
  std::size_t output_bits = 0;  // m_out

  std::size_t bus_width() const { return input_bits + slots; }  // W
  std::size_t selector_bits() const;
  std::size_t program_bits() const;  // |S_C|

  nlohmann::json to_json() const;
  static UniversalBudget from_json(const nlohmann::json& j);
  bool operator==(const UniversalBudget&) const = default;
};

struct UniversalCircuit {
  UniversalBudget budget;
  Circuit circuit;  // inputs are (S_C || x)
  std::vector<Circuit> projections;  // one single-output circuit per output bit

  std::size_t program_bits() const { return budget.program_bits(); }
  std::size_t input_bits() const { return budget.input_bits; }
};

UniversalCircuit build_universal(const UniversalBudget& budget, bool with_projections = true);

// Raw program: per slot two selectors and a truth table, then output selectors.
struct ProgramSlot {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint8_t tt = 0;
};
struct Program {
  std::vector<ProgramSlot> slots;
  std::vector<std::size_t> outputs;
};

// Throws BudgetError for a program that does not fit or selects a wire that is
// not available to that slot.
BitVec encode_slots(const Program& p, const UniversalBudget& u);
BitVec encode_program(const Circuit& c, const UniversalBudget& u);
Program decode_program(std::span<const std::uint8_t> bits, const UniversalBudget& u);

// Smallest budget holding all circuits (slots = max gate count, etc.).
UniversalBudget fit_budget(const std::vector<Circuit>& circuits);

}  // namespace tabverify::circuit
