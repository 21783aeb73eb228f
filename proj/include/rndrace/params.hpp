#pragma once

#include <string>

namespace rndrace {

/// Primitives of the two-stage race. The stage-1 rate is either
/// `stage1_rate` (with prior probability `prior_feasible`) or zero.
struct ModelParams {
  double prior_feasible = 0.0;  ///< prior that stage 1 can be solved, in (0,1)
  double stage1_rate = 0.0;     ///< stage-1 arrival rate when feasible
  double stage2_rate = 0.0;     ///< stage-2 arrival rate
  double reward1 = 0.0;         ///< reward for the intermediate product
  double reward2 = 0.0;         ///< reward for the final product
  double cost_rate = 0.0;       ///< flow cost of stage-1 research

  /// Throws ValidationError naming the offending field.
  void validate() const;

  double total_reward() const { return reward1 + reward2; }
};

struct AssumptionReport {
  bool a1_holds = false;
  double a1_margin = 0.0;  // alpha*H*(p1+p2) - c
  bool a2_holds = false;
  double a2_margin = 0.0;  // p1*H - p2*mu
  bool a3_holds = false;
  double a3_margin = 0.0;  // LHS - RHS of the A3 inequality; NaN when A2 fails
};

/// Reference parameters: alpha=0.8, H=1, mu=0.5,
/// p1=1, p2=0.2, c=0.8.
ModelParams reference_params(double cost_rate = 0.8);

std::string to_string(const ModelParams& params);

}  // namespace rndrace
