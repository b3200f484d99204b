#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tabverify/common.hpp"

namespace tabverify::table {

enum class ValueType { Int, Bool };

std::string to_string(ValueType t);

enum class ExprOp { Const, Input, Add, Sub, Mul, Neg, Lt, Le, Eq, Ne, Gt, Ge, And, Or, Not, Ite };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Typed expression tree over fixed-width two's-complement integers and booleans.
struct Expr {
  ExprOp op = ExprOp::Const;
  ValueType type = ValueType::Int;
  std::int64_t value = 0;  // Const
  std::string name;        // Input
  std::vector<ExprPtr> args;
};

ExprPtr make_const(std::int64_t value, ValueType type);
ExprPtr make_input(std::string name, ValueType type);
// Builds an operator node; throws FormatError when the operand types do not fit.
ExprPtr make_op(ExprOp op, std::vector<ExprPtr> args);

std::string to_string(const Expr& e);

// Values are bound by port name; booleans are 0/1.
using Env = std::map<std::string, std::int64_t>;

// Evaluates with integer arithmetic wrapped to `payload_bits` (two's complement).
std::int64_t evaluate(const Expr& e, const Env& env, int payload_bits);

// Wraps v into the signed range of `bits`.
std::int64_t wrap_signed(std::int64_t v, int bits);

void collect_inputs(const Expr& e, std::vector<std::string>& names);

struct Port {
  std::string name;
  ValueType type = ValueType::Int;
};

struct Row {
  ExprPtr predicate;
  std::vector<ExprPtr> functions;  // one per output port
};

struct Table {
  std::string name;
  std::vector<Port> inputs;
  std::vector<Port> outputs;
  std::vector<Row> rows;

  const Port* find_input(const std::string& port) const;
  const Port* find_output(const std::string& port) const;
};

struct Endpoint {
  std::string node;  // table name, or "Input" / "Output"
  std::string port;
  bool operator==(const Endpoint&) const = default;
};

struct Edge {
  Endpoint from;
  Endpoint to;
};

struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct ExternalPort {
  std::string name;
  ValueType type = ValueType::Int;
  std::optional<Range> range;  // declared domain of an external input
};

inline constexpr const char* kInputNode = "Input";
inline constexpr const char* kOutputNode = "Output";

struct TableGraph {
  std::string name;
  int width = 16;  // m: tag half + payload half
  std::vector<ExternalPort> inputs;
  std::vector<ExternalPort> outputs;
  std::vector<Table> tables;
  std::vector<Edge> edges;

  int payload_bits() const { return width / 2; }
  const Table* find_table(const std::string& table_name) const;
  const ExternalPort* find_input(const std::string& port) const;
  const ExternalPort* find_output(const std::string& port) const;
};

// Value bound to an external port; nullopt is the "null" of an unevaluated path.
using Assignment = std::map<std::string, std::optional<std::int64_t>>;

std::string to_string(const Assignment& a, const std::vector<ExternalPort>& ports);
nlohmann::json assignment_to_json(const Assignment& a, const std::vector<ExternalPort>& ports);
Assignment assignment_from_json(const nlohmann::json& j, const std::vector<ExternalPort>& ports);

// Parse failure with a 1-based source location.
class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

TableGraph parse_graph(const std::string& text);
// Source text that parses back to an equivalent graph.
std::string format_graph(const TableGraph& g);
// Structural validation (also run by parse_graph); throws FormatError.
void validate(const TableGraph& g);
// Tables in a topological order of the original graph.
std::vector<std::size_t> topological_order(const TableGraph& g);

// Plain evaluation of the original multi-row graph. A table whose inputs are
// null, or for which no row (or more than one row) holds, outputs null.
Assignment evaluate_original(const TableGraph& g, const Assignment& x);

// ---------------------------------------------------------------------------
// Completeness / disjointness

struct PropertyWitness {
  Env input;
  std::vector<std::size_t> rows_true;
};

struct PropertyDomain {
  std::map<std::string, Range> ranges;  // per input port; missing ports use the full payload range
  std::uint64_t exhaustive_limit = std::uint64_t{1} << 20;
  std::uint64_t sample_budget = 100000;
  std::uint64_t seed = 1;
};

struct PropertyReport {
  bool exhaustive = true;
  std::uint64_t points_checked = 0;
  std::vector<PropertyWitness> completeness_violations;
  std::vector<PropertyWitness> disjointness_violations;
  // For sampled checks: probability mass of violations bounded by this value
  // with 95% confidence when no violation was seen.
  double violation_bound = 0.0;

  bool complete() const { return completeness_violations.empty(); }
  bool disjoint() const { return disjointness_violations.empty(); }
  bool ok() const { return complete() && disjoint(); }
};

PropertyReport check_properties(const Table& t, const PropertyDomain& domain, int payload_bits,
                                std::size_t max_witnesses = 8);

// ---------------------------------------------------------------------------
// Tagged values and the single-row transformation

// m-bit word: tag half then payload half, each MSB first. Bottom is the all-zero
// word; top is the tag half-word 0...01.
struct TaggedValue {
  bool top = false;
  std::int64_t payload = 0;

  static TaggedValue bottom() { return {}; }
  static TaggedValue of(std::int64_t v) { return {true, v}; }

  BitVec to_bits(int width) const;
  // Throws FormatError if the tag half is neither top nor bottom, or a bottom
  // word carries a non-zero payload.
  static TaggedValue from_bits(std::span<const std::uint8_t> bits, ValueType type);

  bool operator==(const TaggedValue&) const = default;
};

BitVec top_tag_bits(int width);
BitVec bottom_tag_bits(int width);

std::string to_string(const TaggedValue& v, ValueType type);

// Where a transformed table reads one input word from.
struct InputSlot {
  bool external = false;
  std::string external_name;  // external input name
  std::size_t group = 0;      // producing original table (internal)
  std::size_t port = 0;       // output port index in that group
  ValueType type = ValueType::Int;
};

struct OutputSlot {
  ValueType type = ValueType::Int;
  std::optional<std::string> external_name;  // feeds Output
  bool internal = false;                     // feeds at least one table
};

// Public shape of one transformed table.
struct StructNode {
  std::size_t group = 0;
  std::vector<InputSlot> inputs;
  std::vector<OutputSlot> outputs;
  int level = 1;
};

// The structure graph: node-anonymized wiring that is made public.
struct StructureGraph {
  int width = 16;
  std::vector<ExternalPort> inputs;
  std::vector<ExternalPort> outputs;
  std::vector<StructNode> nodes;
  std::vector<std::vector<std::size_t>> groups;  // siblings per original table

  // Producer nodes feeding node i (all siblings of every internal slot).
  std::vector<std::size_t> predecessors(std::size_t i) const;
  std::vector<std::size_t> successors(std::size_t i) const;
  bool has_edge(std::size_t from, std::size_t to) const;
  bool is_source(std::size_t i) const;
  bool is_sink(std::size_t i) const;
  std::size_t input_words(std::size_t i) const { return nodes[i].inputs.size(); }
  std::size_t output_words(std::size_t i) const { return nodes[i].outputs.size(); }
  std::size_t max_input_words() const;
  std::size_t max_output_words() const;

  nlohmann::json to_json() const;
  static StructureGraph from_json(const nlohmann::json& j);
  bool operator==(const StructureGraph& o) const { return to_json() == o.to_json(); }
};

struct RowTable {
  std::string label;   // e.g. PT3
  std::string origin;  // original table name
  std::size_t row_index = 0;
  std::vector<std::string> input_names;  // port names bound in the row expressions
  Row row;
};

struct TransformedGraph {
  std::vector<RowTable> tables;
  StructureGraph structure;

  int width() const { return structure.width; }
  int payload_bits() const { return structure.width / 2; }
  std::size_t size() const { return tables.size(); }

  nlohmann::json to_json() const;
  static TransformedGraph from_json(const nlohmann::json& j);
};

inline constexpr int kTransformedFormatVersion = 1;

// Single-row transformation; throws BudgetError when a constant or input
// domain does not fit the payload width.
TransformedGraph transform(const TableGraph& g);

// F(w) of a transformed table: (top, f(x)) when every input is top and the
// predicate holds, else all outputs are bottom.
std::vector<TaggedValue> apply_row(const RowTable& t, const std::vector<TaggedValue>& inputs,
                                   int payload_bits);

// Tables by non-decreasing level, ties by index.
std::vector<std::size_t> consistent_order(const StructureGraph& s);

struct TableTrace {
  bool evaluated = false;
  std::vector<TaggedValue> inputs;   // merged input words (when evaluated)
  std::vector<TaggedValue> outputs;  // when evaluated
};

struct PlainResult {
  Assignment outputs;
  std::vector<TableTrace> trace;  // indexed by transformed table
};

// Merges the sibling outputs for (group, port): the unique top value, else null.
std::optional<TaggedValue> merge_group(const std::vector<std::size_t>& siblings, std::size_t port,
                                       const std::vector<TableTrace>& trace);

PlainResult evaluate_plain(const TransformedGraph& tg, const Assignment& x);

// Encodes an external input value; throws BudgetError if it does not fit.
TaggedValue encode_external(std::int64_t value, ValueType type, int payload_bits);

}  // namespace tabverify::table
