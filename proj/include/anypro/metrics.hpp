#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anypro/bgp_sim.hpp"
#include "anypro/polling.hpp"

namespace anypro {

// Fraction of clients whose assigned ingress equals the desired one;
// unreachable clients count as unmatched. Denominator is the desired-mapping
// client count.
double normalized_objective(const Mapping& m, const DesiredMapping& dm);

struct RttStats {
  double p50 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double mean = 0.0;
  std::vector<std::pair<double, double>> cdf;  // (rtt_ms, cumulative fraction)
};

// Nearest-rank percentiles; throws MetricsError on an empty mapping.
RttStats rtt_distribution(const Mapping& m);

// Pearson coefficient; needs >= 3 points and nonzero variance in both
// coordinates (throws MetricsError otherwise).
double correlation(const std::vector<std::pair<double, double>>& points);

// Adjustment counts are reported by the phases that made them; experiments
// come from the oracle's counter.
struct BudgetLog {
  std::int64_t polling_adjustments = 0;
  std::vector<std::int64_t> scan_adjustments;
  std::int64_t eval_adjustments = 0;
  double convergence_cost_minutes = 10.0;
};

struct BudgetReport {
  std::int64_t experiments = 0;
  std::int64_t polling_adjustments = 0;
  std::int64_t scan_adjustments_total = 0;
  std::int64_t eval_adjustments = 0;
  std::int64_t total_adjustments = 0;
  double simulated_wall_clock_minutes = 0.0;
};

BudgetReport budget_report(const Oracle& o, const BudgetLog& log);

// Region tag = PoP of the desired ingress.
std::map<std::string, double> per_region_objective(const Topology& t, const Mapping& m,
                                                   const DesiredMapping& dm);

std::string cdf_to_csv(const RttStats& stats);

}  // namespace anypro
