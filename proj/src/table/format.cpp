#include <sstream>

#include "tabverify/table.hpp"

namespace tabverify::table {

namespace {

void ports(std::ostringstream& out, const std::vector<Port>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i)
    out << (i ? ", " : "") << ps[i].name << " : " << to_string(ps[i].type);
}

}  // namespace

std::string format_graph(const TableGraph& g) {
  std::ostringstream out;
  out << "graph " << g.name << ";\nwidth " << g.width << ";\n\n";
  for (const auto& p : g.inputs) {
    out << "input " << p.name << " : " << to_string(p.type);
    if (p.range) out << " [" << p.range->lo << ".." << p.range->hi << "]";
    out << ";\n";
  }
  for (const auto& p : g.outputs) out << "output " << p.name << " : " << to_string(p.type) << ";\n";
  for (const auto& t : g.tables) {
    out << "\ntable " << t.name << " {\n  inputs: ";
    ports(out, t.inputs);
    out << ";\n  outputs: ";
    ports(out, t.outputs);
    out << ";\n  rows: [\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out << "    (" << to_string(*t.rows[r].predicate);
      for (const auto& f : t.rows[r].functions) out << ", " << to_string(*f);
      out << ")" << (r + 1 < t.rows.size() ? "," : "") << "\n";
    }
    out << "  ];\n}\n";
  }
  out << "\nedges {\n";
  for (const auto& e : g.edges)
    out << "  " << e.from.node << "." << e.from.port << " -> " << e.to.node << "." << e.to.port << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace tabverify::table
