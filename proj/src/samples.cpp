#include "tabverify/samples.hpp"

namespace tabverify::samples {

const std::string& worked_graph() {
  static const std::string text = R"tbl(# Worked example: eight row tables after the single-row transformation.
graph worked_example;
width 16;

input a : int [0..100];
input b : bool;
output y1 : bool;
output y2 : int;

table A {
  inputs: a : int;
  outputs: z : int;
  rows: [
    (a > 45, a - 20),
    (35 <= a <= 45, a - 5),
    (25 <= a < 35, a),
    (a < 25, 20)
  ];
}

table Z {
  inputs: z : int;
  outputs: y : bool;
  rows: [
    (z > 30, true),
    (z <= 30, false)
  ];
}

table B {
  inputs: b : bool;
  outputs: c : int;
  rows: [
    (b == true, 2),
    (b == false, 3)
  ];
}

edges {
  Input.a -> A.a;
  A.z -> Z.z;
  Z.y -> Output.y1;
  Input.b -> B.b;
  B.c -> Output.y2;
}
)tbl";
  return text;
}

const std::string& worked_spec() {
  static const std::string text = R"tbl(# Requirements for the worked example, stated without the intermediate z.
graph worked_example_spec;
width 16;

input a : int [0..100];
input b : bool;
output y1 : bool;
output y2 : int;

table Y1 {
  inputs: a : int;
  outputs: y : bool;
  rows: [
    (a > 50 || 36 <= a <= 45 || 31 <= a <= 34, true),
    (!(a > 50 || 36 <= a <= 45 || 31 <= a <= 34), false)
  ];
}

table Y2 {
  inputs: b : bool;
  outputs: c : int;
  rows: [(true, if b then 2 else 3)];
}

edges {
  Input.a -> Y1.a;
  Y1.y -> Output.y1;
  Input.b -> Y2.b;
  Y2.c -> Output.y2;
}
)tbl";
  return text;
}

const std::string& worked_critical_points() {
  static const std::string text = R"tbl([
  {"x": {"a": 60, "b": true}, "y": {"y1": true, "y2": 2}},
  {"x": {"a": 10, "b": false}, "y": {"y1": false, "y2": 3}}
]
)tbl";
  return text;
}

std::string worked_graph_mutated() {
  std::string text = worked_graph();
  const std::string from = "(b == true, 2)";
  text.replace(text.find(from), from.size(), "(b == true, 3)");
  return text;
}

const std::string& chain_graph() {
  static const std::string text = R"tbl(graph chain;
width 16;

input x : int [-20..20];
output y : int;

table P {
  inputs: x : int;
  outputs: u : int;
  rows: [(x < 0, 0 - x), (x >= 0, x + 1)];
}

table Q {
  inputs: u : int;
  outputs: v : int;
  rows: [(u > 10, u - 10), (u <= 10, u * 2)];
}

table R {
  inputs: v : int;
  outputs: y : int;
  rows: [(v == 0, 100), (v != 0, v + 3)];
}

edges {
  Input.x -> P.x;
  P.u -> Q.u;
  Q.v -> R.v;
  R.y -> Output.y;
}
)tbl";
  return text;
}

const std::string& diamond_graph() {
  static const std::string text = R"tbl(graph diamond;
width 16;

input x : int [0..30];
input k : bool;
output y : int;
output flag : bool;

table S {
  inputs: x : int, k : bool;
  outputs: l : int, r : int;
  rows: [(k, x, x + 1), (!k, x * 2, 5)];
}

table L {
  inputs: l : int;
  outputs: p : int;
  rows: [(l > 20, l - 20), (l <= 20, 0)];
}

table M {
  inputs: r : int;
  outputs: q : int;
  rows: [(true, r + r)];
}

table J {
  inputs: p : int, q : int;
  outputs: y : int, flag : bool;
  rows: [(p > q, p - q, true), (p <= q, q - p, false)];
}

edges {
  Input.x -> S.x;
  Input.k -> S.k;
  S.l -> L.l;
  S.r -> M.r;
  L.p -> J.p;
  M.q -> J.q;
  J.y -> Output.y;
  J.flag -> Output.flag;
}
)tbl";
  return text;
}

}  // namespace tabverify::samples
