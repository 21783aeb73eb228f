#pragma once

// JSON and CSV rendering of parameters and results. JSON keys match the
// field names of the result types; parameters use the short keys
// {"alpha","H","mu","p1","p2","c"}.

#include <json.hpp>
#include <string>
#include <vector>

#include "rndrace/params.hpp"
#include "rndrace/simulator.hpp"
#include "rndrace/solver.hpp"

namespace rndrace {

using Json = nlohmann::ordered_json;

/// Accepts a flat parameter object, or any object carrying one under
/// "params" (such as the output of `rndrace solve`). Throws ValidationError
/// naming a missing or non-numeric field.
ModelParams params_from_json(const Json& j);

Json to_json(const ModelParams& p);
Json to_json(const AssumptionReport& r);
Json to_json(const EquilibriumCutoffs& c);
Json to_json(const MonopolyBenchmark& m);
Json to_json(const WelfareReport& w);
Json to_json(const SocialExit& s);
Json to_json(const CutoffStrategy& s);
Json to_json(const SimStats& s);
Json to_json(const DeviationScanReport& r);
Json to_json(const TrialRecord& r);
Json to_json(const SweepEntry& e);

/// Reads cutoffs stored under "cutoffs" by `rndrace solve`.
EquilibriumCutoffs cutoffs_from_json(const Json& j);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// One row per time point; header `t,belief,disclose_payoff,
/// withhold_payoff,stay_rate,cost_rate`.
struct CurveRow {
  double t = 0.0;
  double belief = 0.0;
  double disclose_payoff = 0.0;
  double withhold_payoff = 0.0;
  double stay_rate = 0.0;
  double cost_rate = 0.0;
};

inline constexpr const char* kCurveHeader =
    "t,belief,disclose_payoff,withhold_payoff,stay_rate,cost_rate";

/// `n_points` uniform points on [t_lo, t_hi] plus t1 and t2 when they fall
/// inside. Past t2 the rows describe a firm that stays although its opponent
/// exited.
std::vector<CurveRow> equilibrium_curves(const ModelParams& params,
                                         const EquilibriumCutoffs& eq,
                                         std::size_t n_points, double t_lo,
                                         double t_hi);

std::string curves_to_csv(const std::vector<CurveRow>& rows);

std::string sweep_to_csv(const std::vector<SweepEntry>& entries);

}  // namespace rndrace
