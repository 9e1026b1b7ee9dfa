#include "anypro/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "anypro/errors.hpp"

namespace anypro {

double normalized_objective(const Mapping& m, const DesiredMapping& dm) {
  if (dm.desired.empty()) throw MetricsError("desired mapping is empty");
  long matched = 0;
  for (const auto& [c, want] : dm.desired) {
    auto it = m.assignment.find(c);
    if (it != m.assignment.end() && it->second == want) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(dm.desired.size());
}

RttStats rtt_distribution(const Mapping& m) {
  if (m.rtt.empty()) throw MetricsError("mapping has no RTT samples");
  std::vector<double> v;
  v.reserve(m.rtt.size());
  for (const auto& [c, r] : m.rtt) v.push_back(r);
  std::sort(v.begin(), v.end());

  auto nearest_rank = [&v](double pct) {
    std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * v.size()));
    if (rank == 0) rank = 1;
    return v[rank - 1];
  };

  RttStats s;
  s.p50 = nearest_rank(50);
  s.p90 = nearest_rank(90);
  s.p95 = nearest_rank(95);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    s.cdf.push_back({v[i], static_cast<double>(i + 1) / static_cast<double>(v.size())});
  return s;
}

double correlation(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw MetricsError("correlation needs at least 3 points, got " +
                       std::to_string(points.size()));
  double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw MetricsError("degenerate variance: a coordinate is constant");
  return sxy / std::sqrt(sxx * syy);
}

BudgetReport budget_report(const Oracle& o, const BudgetLog& log) {
  BudgetReport r;
  r.experiments = o.experiment_count();
  r.polling_adjustments = log.polling_adjustments;
  for (auto a : log.scan_adjustments) r.scan_adjustments_total += a;
  r.eval_adjustments = log.eval_adjustments;
  r.total_adjustments = r.polling_adjustments + r.scan_adjustments_total + r.eval_adjustments;
  r.simulated_wall_clock_minutes =
      static_cast<double>(r.total_adjustments) * log.convergence_cost_minutes;
  return r;
}

std::map<std::string, double> per_region_objective(const Topology& t, const Mapping& m,
                                                   const DesiredMapping& dm) {
  std::map<std::string, std::pair<long, long>> acc;  // region -> (matched, total)
  for (const auto& [c, want] : dm.desired) {
    const std::string& pop = t.ingresses.at(want).pop;
    auto& [matched, total] = acc[pop];
    ++total;
    auto it = m.assignment.find(c);
    if (it != m.assignment.end() && it->second == want) ++matched;
  }
  std::map<std::string, double> out;
  for (const auto& [pop, mt] : acc)
    out[pop] = static_cast<double>(mt.first) / static_cast<double>(mt.second);
  return out;
}

std::string cdf_to_csv(const RttStats& stats) {
  std::string out = "rtt_ms,fraction\n";
  char buf[64];
  for (const auto& [rtt, frac] : stats.cdf) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.6f\n", rtt, frac);
    out += buf;
  }
  return out;
}

}  // namespace anypro
