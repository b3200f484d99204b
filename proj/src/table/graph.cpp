#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "table_internal.hpp"

namespace tabverify::table {

ValueType value_type_from_string(const std::string& s) {
  if (s == "int") return ValueType::Int;
  if (s == "bool") return ValueType::Bool;
  throw FormatError("unknown value type '" + s + "'");
}

const Port* Table::find_input(const std::string& port) const {
  for (const auto& p : inputs)
    if (p.name == port) return &p;
  return nullptr;
}

const Port* Table::find_output(const std::string& port) const {
  for (const auto& p : outputs)
    if (p.name == port) return &p;
  return nullptr;
}

const Table* TableGraph::find_table(const std::string& table_name) const {
  for (const auto& t : tables)
    if (t.name == table_name) return &t;
  return nullptr;
}

const ExternalPort* TableGraph::find_input(const std::string& port) const {
  for (const auto& p : inputs)
    if (p.name == port) return &p;
  return nullptr;
}

const ExternalPort* TableGraph::find_output(const std::string& port) const {
  for (const auto& p : outputs)
    if (p.name == port) return &p;
  return nullptr;
}

namespace {

std::string endpoint_name(const Endpoint& e) { return e.node + "." + e.port; }

std::size_t table_index(const TableGraph& g, const std::string& name) {
  for (std::size_t i = 0; i < g.tables.size(); ++i)
    if (g.tables[i].name == name) return i;
  return g.tables.size();
}

}  // namespace

void validate(const TableGraph& g) {
  if (g.width < 4 || g.width > 32 || g.width % 2 != 0)
    throw FormatError("width must be even and in [4, 32], got " + std::to_string(g.width));
  if (g.tables.empty()) throw FormatError("no tables");
  {
    std::set<std::string> names;
    for (const auto& t : g.tables) {
      if (!names.insert(t.name).second) throw FormatError("duplicate table name '" + t.name + "'");
      if (t.rows.empty()) throw FormatError("table '" + t.name + "' has no rows");
      if (t.inputs.empty()) throw FormatError("table '" + t.name + "' has no inputs");
      if (t.outputs.empty()) throw FormatError("table '" + t.name + "' has no outputs");
      for (const auto& r : t.rows) {
        if (!r.predicate || r.predicate->type != ValueType::Bool)
          throw FormatError("table '" + t.name + "': predicate must be bool");
        if (r.functions.size() != t.outputs.size())
          throw FormatError("table '" + t.name + "': row arity differs from outputs");
        std::vector<std::string> used;
        collect_inputs(*r.predicate, used);
        for (std::size_t k = 0; k < r.functions.size(); ++k) {
          if (r.functions[k]->type != t.outputs[k].type)
            throw FormatError("table '" + t.name + "': function type differs from output '" +
                              t.outputs[k].name + "'");
          collect_inputs(*r.functions[k], used);
        }
        for (const auto& u : used)
          if (!t.find_input(u))
            throw FormatError("table '" + t.name + "' reads undeclared port '" + u + "'");
      }
    }
  }

  std::map<std::string, int> producers;  // consumer endpoint -> count
  std::map<std::string, int> external_feeds;  // producer endpoint -> external outputs fed
  for (const auto& e : g.edges) {
    ValueType from_type;
    ValueType to_type;
    if (e.from.node == kInputNode) {
      const ExternalPort* p = g.find_input(e.from.port);
      if (!p) throw FormatError("dangling edge: no external input '" + e.from.port + "'");
      from_type = p->type;
    } else {
      const Table* t = g.find_table(e.from.node);
      if (!t) throw FormatError("dangling edge: no table '" + e.from.node + "'");
      const Port* p = t->find_output(e.from.port);
      if (!p) throw FormatError("dangling edge: no output port '" + endpoint_name(e.from) + "'");
      from_type = p->type;
    }
    if (e.to.node == kOutputNode) {
      const ExternalPort* p = g.find_output(e.to.port);
      if (!p) throw FormatError("dangling edge: no external output '" + e.to.port + "'");
      if (e.from.node == kInputNode)
        throw FormatError("edge " + endpoint_name(e.from) + " -> " + endpoint_name(e.to) +
                          " bypasses all tables");
      if (++external_feeds[endpoint_name(e.from)] > 1)
        throw FormatError("port " + endpoint_name(e.from) + " feeds more than one external output");
      to_type = p->type;
    } else {
      const Table* t = g.find_table(e.to.node);
      if (!t) throw FormatError("dangling edge: no table '" + e.to.node + "'");
      const Port* p = t->find_input(e.to.port);
      if (!p) throw FormatError("dangling edge: no input port '" + endpoint_name(e.to) + "'");
      to_type = p->type;
    }
    if (from_type != to_type)
      throw FormatError("type mismatch on edge " + endpoint_name(e.from) + " -> " + endpoint_name(e.to));
    if (++producers[endpoint_name(e.to)] > 1)
      throw FormatError("port " + endpoint_name(e.to) + " has more than one producer");
  }
  for (const auto& t : g.tables)
    for (const auto& p : t.inputs)
      if (!producers.count(t.name + "." + p.name))
        throw FormatError("input port " + t.name + "." + p.name + " has no producer");
  for (const auto& o : g.outputs)
    if (!producers.count(std::string(kOutputNode) + "." + o.name))
      throw FormatError("external output '" + o.name + "' has no producer");
  for (const auto& i : g.inputs) {
    if (i.range) {
      const std::int64_t lo = -(std::int64_t{1} << (g.payload_bits() - 1));
      const std::int64_t hi = (std::int64_t{1} << (g.payload_bits() - 1)) - 1;
      if (i.type == ValueType::Int && (i.range->lo < lo || i.range->hi > hi))
        throw BudgetError("width overflow: domain of '" + i.name + "' exceeds " +
                          std::to_string(g.payload_bits()) + "-bit payload");
    }
  }
  topological_order(g);
}

std::vector<std::size_t> topological_order(const TableGraph& g) {
  const std::size_t n = g.tables.size();
  std::vector<std::set<std::size_t>> succ(n);
  std::vector<int> indeg(n, 0);
  for (const auto& e : g.edges) {
    if (e.from.node == kInputNode || e.to.node == kOutputNode) continue;
    const std::size_t a = table_index(g, e.from.node);
    const std::size_t b = table_index(g, e.to.node);
    if (a >= n || b >= n) continue;
    if (succ[a].insert(b).second) ++indeg[b];
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const std::size_t i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (std::size_t j : succ[i])
      if (--indeg[j] == 0) ready.push_back(j);
  }
  if (order.size() != n) {
    std::string members;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] > 0) members += (members.empty() ? "" : ", ") + g.tables[i].name;
    throw FormatError("cycle detected among tables: " + members);
  }
  return order;
}

Assignment evaluate_original(const TableGraph& g, const Assignment& x) {
  const int h = g.payload_bits();
  std::map<std::string, std::optional<std::int64_t>> values;  // "node.port" -> value
  for (const auto& p : g.inputs) {
    auto it = x.find(p.name);
    values[std::string(kInputNode) + "." + p.name] = it == x.end() ? std::nullopt : it->second;
  }
  std::map<std::string, std::string> source_of;  // consumer -> producer
  for (const auto& e : g.edges) source_of[endpoint_name(e.to)] = endpoint_name(e.from);

  for (std::size_t ti : topological_order(g)) {
    const Table& t = g.tables[ti];
    Env env;
    bool null_input = false;
    for (const auto& p : t.inputs) {
      const auto& v = values[source_of.at(t.name + "." + p.name)];
      if (!v) {
        null_input = true;
        break;
      }
      env[p.name] = *v;
    }
    const Row* chosen = nullptr;
    if (!null_input) {
      int holding = 0;
      for (const auto& r : t.rows)
        if (evaluate(*r.predicate, env, h)) {
          ++holding;
          chosen = &r;
        }
      if (holding != 1) chosen = nullptr;
    }
    for (std::size_t k = 0; k < t.outputs.size(); ++k) {
      std::optional<std::int64_t> v;
      if (chosen) v = evaluate(*chosen->functions[k], env, h);
      values[t.name + "." + t.outputs[k].name] = v;
    }
  }
  Assignment out;
  for (const auto& o : g.outputs) out[o.name] = values[source_of.at(std::string(kOutputNode) + "." + o.name)];
  return out;
}

std::string to_string(const Assignment& a, const std::vector<ExternalPort>& ports) {
  std::ostringstream os;
  os << '(';
  bool first = true;
  for (const auto& p : ports) {
    if (!first) os << ", ";
    first = false;
    os << p.name << '=';
    auto it = a.find(p.name);
    if (it == a.end() || !it->second)
      os << "null";
    else if (p.type == ValueType::Bool)
      os << (*it->second ? "True" : "False");
    else
      os << *it->second;
  }
  os << ')';
  return os.str();
}

nlohmann::json assignment_to_json(const Assignment& a, const std::vector<ExternalPort>& ports) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& p : ports) {
    auto it = a.find(p.name);
    if (it == a.end() || !it->second)
      j[p.name] = nullptr;
    else if (p.type == ValueType::Bool)
      j[p.name] = *it->second != 0;
    else
      j[p.name] = *it->second;
  }
  return j;
}

Assignment assignment_from_json(const nlohmann::json& j, const std::vector<ExternalPort>& ports) {
  if (!j.is_object()) throw FormatError("assignment must be a JSON object");
  Assignment a;
  for (const auto& p : ports) {
    if (!j.contains(p.name)) throw FormatError("assignment lacks port '" + p.name + "'");
    const auto& v = j.at(p.name);
    if (v.is_null())
      a[p.name] = std::nullopt;
    else if (v.is_boolean())
      a[p.name] = v.get<bool>() ? 1 : 0;
    else if (v.is_number_integer())
      a[p.name] = v.get<std::int64_t>();
    else
      throw FormatError("assignment value for '" + p.name + "' is not an integer, boolean or null");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& p : ports) known = known || p.name == it.key();
    if (!known) throw FormatError("assignment names unknown port '" + it.key() + "'");
  }
  return a;
}

}  // namespace tabverify::table
