#include "tabverify/table.hpp"

namespace tabverify::table {

PropertyReport check_properties(const Table& t, const PropertyDomain& domain, int payload_bits,
                                std::size_t max_witnesses) {
  struct Axis {
    std::string name;
    std::int64_t lo;
    std::uint64_t size;
  };
  std::vector<Axis> axes;
  long double total = 1;
  for (const auto& p : t.inputs) {
    Range r;
    if (auto it = domain.ranges.find(p.name); it != domain.ranges.end())
      r = it->second;
    else if (p.type == ValueType::Bool)
      r = {0, 1};
    else
      r = {-(std::int64_t{1} << (payload_bits - 1)), (std::int64_t{1} << (payload_bits - 1)) - 1};
    if (r.lo > r.hi) throw Error("check_properties: empty range for '" + p.name + "'");
    axes.push_back({p.name, r.lo, static_cast<std::uint64_t>(r.hi - r.lo) + 1});
    total *= static_cast<long double>(axes.back().size);
  }

  PropertyReport rep;
  rep.exhaustive = total <= static_cast<long double>(domain.exhaustive_limit);
  const std::uint64_t points =
      rep.exhaustive ? static_cast<std::uint64_t>(total) : domain.sample_budget;

  auto check = [&](const Env& env) {
    PropertyWitness w;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (evaluate(*t.rows[r].predicate, env, payload_bits)) w.rows_true.push_back(r);
    if (w.rows_true.size() == 1) return false;
    auto& bucket = w.rows_true.empty() ? rep.completeness_violations : rep.disjointness_violations;
    if (bucket.size() < max_witnesses) {
      w.input = env;
      bucket.push_back(std::move(w));
    }
    return true;
  };

  Rng rng(domain.seed);
  std::uint64_t violations = 0;
  Env env;
  for (std::uint64_t n = 0; n < points; ++n) {
    std::uint64_t idx = n;
    for (const auto& a : axes) {
      const std::uint64_t off = rep.exhaustive ? idx % a.size : rng.below(a.size);
      idx /= a.size;
      env[a.name] = a.lo + static_cast<std::int64_t>(off);
    }
    if (check(env)) ++violations;
  }
  rep.points_checked = points;
  if (!rep.exhaustive && points > 0)
    rep.violation_bound = violations == 0 ? 3.0 / static_cast<double>(points)
                                          : static_cast<double>(violations) / static_cast<double>(points);
  return rep;
}

}  // namespace tabverify::table
