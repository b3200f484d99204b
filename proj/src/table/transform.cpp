#include <algorithm>
#include <map>
#include <set>

#include "table_internal.hpp"

namespace tabverify::table {

namespace {

std::int64_t payload_min(int h) { return -(std::int64_t{1} << (h - 1)); }
std::int64_t payload_max(int h) { return (std::int64_t{1} << (h - 1)) - 1; }

void check_constants(const Expr& e, int h, const std::string& where) {
  if (e.op == ExprOp::Const && e.type == ValueType::Int &&
      (e.value < payload_min(h) || e.value > payload_max(h)))
    throw BudgetError("width overflow: constant " + std::to_string(e.value) + " in " + where +
                      " does not fit a " + std::to_string(h) + "-bit payload");
  for (const auto& a : e.args) check_constants(*a, h, where);
}

}  // namespace

BitVec top_tag_bits(int width) { return uint_to_bits(1, static_cast<std::size_t>(width / 2)); }
BitVec bottom_tag_bits(int width) { return BitVec(static_cast<std::size_t>(width / 2), 0); }

BitVec TaggedValue::to_bits(int width) const {
  const auto h = static_cast<std::size_t>(width / 2);
  BitVec out = top ? top_tag_bits(width) : bottom_tag_bits(width);
  const std::uint64_t mask = h >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << h) - 1;
  const BitVec p = uint_to_bits(top ? static_cast<std::uint64_t>(payload) & mask : 0, h);
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

TaggedValue TaggedValue::from_bits(std::span<const std::uint8_t> bits, ValueType type) {
  if (bits.size() < 4 || bits.size() % 2 != 0) throw FormatError("tagged word has odd or tiny width");
  const std::size_t h = bits.size() / 2;
  const std::uint64_t tag = bits_to_uint(bits.subspan(0, h));
  const std::uint64_t raw = bits_to_uint(bits.subspan(h));
  if (tag == 0) {
    if (raw != 0) throw FormatError("bottom word carries a payload");
    return bottom();
  }
  if (tag != 1) throw FormatError("tag half is neither top nor bottom");
  if (type == ValueType::Bool) {
    if (raw > 1) throw FormatError("bool payload outside {0,1}");
    return of(static_cast<std::int64_t>(raw));
  }
  return of(wrap_signed(static_cast<std::int64_t>(raw), static_cast<int>(h)));
}

std::string to_string(const TaggedValue& v, ValueType type) {
  if (!v.top) return "(bot,bot)";
  if (type == ValueType::Bool) return std::string("(top,") + (v.payload ? "True" : "False") + ")";
  return "(top," + std::to_string(v.payload) + ")";
}

TaggedValue encode_external(std::int64_t value, ValueType type, int payload_bits) {
  if (type == ValueType::Bool) {
    if (value != 0 && value != 1)
      throw BudgetError("width overflow: bool value " + std::to_string(value));
    return TaggedValue::of(value);
  }
  if (value < payload_min(payload_bits) || value > payload_max(payload_bits))
    throw BudgetError("width overflow: value " + std::to_string(value) + " does not fit a " +
                      std::to_string(payload_bits) + "-bit payload");
  return TaggedValue::of(value);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> StructureGraph::predecessors(std::size_t i) const {
  std::set<std::size_t> out;
  for (const auto& s : nodes.at(i).inputs)
    if (!s.external) out.insert(groups.at(s.group).begin(), groups.at(s.group).end());
  return {out.begin(), out.end()};
}

std::vector<std::size_t> StructureGraph::successors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (has_edge(i, j)) out.push_back(j);
  return out;
}

bool StructureGraph::has_edge(std::size_t from, std::size_t to) const {
  if (from >= nodes.size() || to >= nodes.size()) return false;
  const std::size_t g = nodes[from].group;
  for (const auto& s : nodes[to].inputs)
    if (!s.external && s.group == g) return true;
  return false;
}

bool StructureGraph::is_source(std::size_t i) const {
  for (const auto& s : nodes.at(i).inputs)
    if (s.external) return true;
  return false;
}

bool StructureGraph::is_sink(std::size_t i) const {
  for (const auto& s : nodes.at(i).outputs)
    if (s.external_name) return true;
  return false;
}

std::size_t StructureGraph::max_input_words() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n = std::max(n, node.inputs.size());
  return n;
}

std::size_t StructureGraph::max_output_words() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n = std::max(n, node.outputs.size());
  return n;
}

namespace {

nlohmann::json port_to_json(const ExternalPort& p) {
  nlohmann::json j = {{"name", p.name}, {"type", to_string(p.type)}};
  if (p.range) j["range"] = {p.range->lo, p.range->hi};
  return j;
}

ExternalPort port_from_json(const nlohmann::json& j) {
  ExternalPort p;
  p.name = j.at("name").get<std::string>();
  p.type = value_type_from_string(j.at("type").get<std::string>());
  if (j.contains("range")) p.range = Range{j.at("range").at(0).get<std::int64_t>(), j.at("range").at(1).get<std::int64_t>()};
  return p;
}

}  // namespace

nlohmann::json StructureGraph::to_json() const {
  nlohmann::json j;
  j["width"] = width;
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs) j["inputs"].push_back(port_to_json(p));
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) j["outputs"].push_back(port_to_json(p));
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json jn;
    jn["group"] = n.group;
    jn["level"] = n.level;
    jn["inputs"] = nlohmann::json::array();
    for (const auto& s : n.inputs) {
      nlohmann::json js = {{"type", to_string(s.type)}};
      if (s.external)
        js["external"] = s.external_name;
      else
        js["from"] = {s.group, s.port};
      jn["inputs"].push_back(js);
    }
    jn["outputs"] = nlohmann::json::array();
    for (const auto& s : n.outputs) {
      nlohmann::json js = {{"type", to_string(s.type)}, {"internal", s.internal}};
      if (s.external_name) js["external"] = *s.external_name;
      jn["outputs"].push_back(js);
    }
    j["nodes"].push_back(jn);
  }
  j["groups"] = groups;
  return j;
}

StructureGraph StructureGraph::from_json(const nlohmann::json& j) {
  try {
    StructureGraph s;
    s.width = j.at("width").get<int>();
    for (const auto& p : j.at("inputs")) s.inputs.push_back(port_from_json(p));
    for (const auto& p : j.at("outputs")) s.outputs.push_back(port_from_json(p));
    for (const auto& jn : j.at("nodes")) {
      StructNode n;
      n.group = jn.at("group").get<std::size_t>();
      n.level = jn.at("level").get<int>();
      for (const auto& js : jn.at("inputs")) {
        InputSlot slot;
        slot.type = value_type_from_string(js.at("type").get<std::string>());
        if (js.contains("external")) {
          slot.external = true;
          slot.external_name = js.at("external").get<std::string>();
        } else {
          slot.group = js.at("from").at(0).get<std::size_t>();
          slot.port = js.at("from").at(1).get<std::size_t>();
        }
        n.inputs.push_back(slot);
      }
      for (const auto& js : jn.at("outputs")) {
        OutputSlot slot;
        slot.type = value_type_from_string(js.at("type").get<std::string>());
        slot.internal = js.at("internal").get<bool>();
        if (js.contains("external")) slot.external_name = js.at("external").get<std::string>();
        n.outputs.push_back(slot);
      }
      s.nodes.push_back(std::move(n));
    }
    s.groups = j.at("groups").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& n : s.nodes) {
      if (n.group >= s.groups.size()) throw FormatError("structure node names unknown group");
      for (const auto& slot : n.inputs)
        if (!slot.external && (slot.group >= s.groups.size() || s.groups[slot.group].empty()))
          throw FormatError("structure slot names unknown group");
    }
    for (const auto& grp : s.groups)
      for (std::size_t i : grp)
        if (i >= s.nodes.size()) throw FormatError("structure group names unknown node");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed structure graph: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

TransformedGraph transform(const TableGraph& g) {
  validate(g);
  const int h = g.payload_bits();
  TransformedGraph tg;
  StructureGraph& s = tg.structure;
  s.width = g.width;
  s.inputs = g.inputs;
  s.outputs = g.outputs;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.tables.size(); ++i) index[g.tables[i].name] = i;

  std::map<std::string, Endpoint> source_of;  // "T.port" -> producer
  std::map<std::string, std::string> external_of;  // "T.port" -> external output
  std::set<std::string> feeds_table;
  for (const auto& e : g.edges) {
    if (e.to.node == kOutputNode) {
      external_of[e.from.node + "." + e.from.port] = e.to.port;
    } else {
      source_of[e.to.node + "." + e.to.port] = e.from;
      if (e.from.node != kInputNode) feeds_table.insert(e.from.node + "." + e.from.port);
    }
  }

  std::vector<int> level(g.tables.size(), 1);
  for (std::size_t ti : topological_order(g)) {
    const Table& t = g.tables[ti];
    for (const auto& p : t.inputs) {
      const Endpoint& src = source_of.at(t.name + "." + p.name);
      if (src.node != kInputNode) level[ti] = std::max(level[ti], level[index.at(src.node)] + 1);
    }
  }

  s.groups.resize(g.tables.size());
  std::size_t label = 0;
  for (std::size_t ti = 0; ti < g.tables.size(); ++ti) {
    const Table& t = g.tables[ti];
    StructNode proto;
    proto.group = ti;
    proto.level = level[ti];
    for (const auto& p : t.inputs) {
      InputSlot slot;
      slot.type = p.type;
      const Endpoint& src = source_of.at(t.name + "." + p.name);
      if (src.node == kInputNode) {
        slot.external = true;
        slot.external_name = src.port;
      } else {
        slot.group = index.at(src.node);
        const Table& pt = g.tables[slot.group];
        for (std::size_t k = 0; k < pt.outputs.size(); ++k)
          if (pt.outputs[k].name == src.port) slot.port = k;
      }
      proto.inputs.push_back(slot);
    }
    for (const auto& p : t.outputs) {
      OutputSlot slot;
      slot.type = p.type;
      const std::string key = t.name + "." + p.name;
      if (auto it = external_of.find(key); it != external_of.end()) slot.external_name = it->second;
      slot.internal = feeds_table.count(key) > 0;
      proto.outputs.push_back(slot);
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string label_text = "PT" + std::to_string(++label);
      check_constants(*t.rows[r].predicate, h, label_text);
      for (const auto& f : t.rows[r].functions) check_constants(*f, h, label_text);
      RowTable rt;
      rt.label = label_text;
      rt.origin = t.name;
      rt.row_index = r;
      for (const auto& p : t.inputs) rt.input_names.push_back(p.name);
      rt.row = t.rows[r];
      s.groups[ti].push_back(tg.tables.size());
      tg.tables.push_back(std::move(rt));
      s.nodes.push_back(proto);
    }
  }
  return tg;
}

std::vector<TaggedValue> apply_row(const RowTable& t, const std::vector<TaggedValue>& inputs,
                                   int payload_bits) {
  if (inputs.size() != t.input_names.size())
    throw Error("apply_row: " + t.label + " expects " + std::to_string(t.input_names.size()) + " inputs");
  std::vector<TaggedValue> out(t.row.functions.size(), TaggedValue::bottom());
  Env env;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].top) return out;
    env[t.input_names[i]] = inputs[i].payload;
  }
  if (!evaluate(*t.row.predicate, env, payload_bits)) return out;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = TaggedValue::of(evaluate(*t.row.functions[k], env, payload_bits));
  return out;
}

std::vector<std::size_t> consistent_order(const StructureGraph& s) {
  std::vector<std::size_t> order(s.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.nodes[a].level < s.nodes[b].level; });
  return order;
}

std::optional<TaggedValue> merge_group(const std::vector<std::size_t>& siblings, std::size_t port,
                                       const std::vector<TableTrace>& trace) {
  std::optional<TaggedValue> found;
  for (std::size_t i : siblings) {
    const TableTrace& t = trace.at(i);
    if (!t.evaluated) return std::nullopt;
    const TaggedValue& v = t.outputs.at(port);
    if (!v.top) continue;
    if (found) return std::nullopt;
    found = v;
  }
  return found;
}

PlainResult evaluate_plain(const TransformedGraph& tg, const Assignment& x) {
  const StructureGraph& s = tg.structure;
  const int h = tg.payload_bits();
  PlainResult res;
  res.trace.resize(tg.size());
  for (std::size_t i : consistent_order(s)) {
    const StructNode& node = s.nodes[i];
    std::vector<TaggedValue> in;
    bool null_input = false;
    for (const auto& slot : node.inputs) {
      std::optional<TaggedValue> v;
      if (slot.external) {
        auto it = x.find(slot.external_name);
        if (it != x.end() && it->second) v = encode_external(*it->second, slot.type, h);
      } else {
        v = merge_group(s.groups[slot.group], slot.port, res.trace);
      }
      if (!v) {
        null_input = true;
        break;
      }
      in.push_back(*v);
    }
    if (null_input) continue;
    TableTrace& t = res.trace[i];
    t.evaluated = true;
    t.outputs = apply_row(tg.tables[i], in, h);
    t.inputs = std::move(in);
  }
  for (const auto& o : s.outputs) {
    std::optional<std::int64_t> value;
    for (std::size_t gi = 0; gi < s.groups.size() && !value; ++gi) {
      if (s.groups[gi].empty()) continue;
      const StructNode& rep = s.nodes[s.groups[gi].front()];
      for (std::size_t k = 0; k < rep.outputs.size(); ++k)
        if (rep.outputs[k].external_name == o.name)
          if (auto v = merge_group(s.groups[gi], k, res.trace)) value = v->payload;
    }
    res.outputs[o.name] = value;
  }
  return res;
}

// ---------------------------------------------------------------------------

nlohmann::json TransformedGraph::to_json() const {
  nlohmann::json j;
  j["format"] = "tabverify-transformed";
  j["version"] = kTransformedFormatVersion;
  j["structure"] = structure.to_json();
  j["tables"] = nlohmann::json::array();
  for (const auto& t : tables) {
    nlohmann::json jt;
    jt["label"] = t.label;
    jt["origin"] = t.origin;
    jt["row"] = t.row_index;
    jt["inputs"] = t.input_names;
    jt["predicate"] = to_string(*t.row.predicate);
    jt["functions"] = nlohmann::json::array();
    for (const auto& f : t.row.functions) jt["functions"].push_back(to_string(*f));
    j["tables"].push_back(jt);
  }
  return j;
}

TransformedGraph TransformedGraph::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "tabverify-transformed")
      throw FormatError("not a transformed graph document");
    const int version = j.at("version").get<int>();
    if (version != kTransformedFormatVersion)
      throw FormatError("transformed graph version " + std::to_string(version) + " is not supported");
    TransformedGraph tg;
    tg.structure = StructureGraph::from_json(j.at("structure"));
    const auto& jt = j.at("tables");
    if (jt.size() != tg.structure.nodes.size()) throw FormatError("table count differs from structure");
    for (std::size_t i = 0; i < jt.size(); ++i) {
      const auto& e = jt[i];
      const StructNode& node = tg.structure.nodes[i];
      RowTable t;
      t.label = e.at("label").get<std::string>();
      t.origin = e.at("origin").get<std::string>();
      t.row_index = e.at("row").get<std::size_t>();
      t.input_names = e.at("inputs").get<std::vector<std::string>>();
      if (t.input_names.size() != node.inputs.size()) throw FormatError(t.label + ": input arity mismatch");
      std::map<std::string, ValueType> scope;
      for (std::size_t k = 0; k < t.input_names.size(); ++k) scope[t.input_names[k]] = node.inputs[k].type;
      t.row.predicate = parse_expr(e.at("predicate").get<std::string>(), scope);
      if (t.row.predicate->type != ValueType::Bool) throw FormatError(t.label + ": predicate is not bool");
      const auto& fs = e.at("functions");
      if (fs.size() != node.outputs.size()) throw FormatError(t.label + ": output arity mismatch");
      for (std::size_t k = 0; k < fs.size(); ++k) {
        ExprPtr f = parse_expr(fs[k].get<std::string>(), scope);
        if (f->type != node.outputs[k].type) throw FormatError(t.label + ": function type mismatch");
        t.row.functions.push_back(std::move(f));
      }
      tg.tables.push_back(std::move(t));
    }
    return tg;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed transformed graph: ") + e.what());
  }
}

}  // namespace tabverify::table
