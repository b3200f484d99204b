#pragma once

#include <string>

namespace tabverify::samples {

// Eight-row-table worked example (tables A, Z, B) and its requirements graph.
const std::string& worked_graph();
const std::string& worked_spec();
// Critical points for the worked example, as a JSON array of {x, y}.
const std::string& worked_critical_points();
// Worked example with the b=True constant changed from 2 to 3.
std::string worked_graph_mutated();

// Three tables in a line.
const std::string& chain_graph();
// Fan-out to two tables that join again; two-input, two-output tables.
const std::string& diamond_graph();

}  // namespace tabverify::samples
