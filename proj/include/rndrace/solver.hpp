#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rndrace/params.hpp"

namespace rndrace {

struct EquilibriumCutoffs {
  double t1 = 0.0;     ///< end of the disclose region
  double t2 = 0.0;     ///< exit time absent a stage-1 success
  double delta = 0.0;  ///< t2 - t1
  bool corner = false; ///< t1 clamped to zero
  double residual = 0.0;  ///< |exit-condition rate - c| at t2
  bool a3_verified = false;
};

struct MonopolyBenchmark {
  double t_star = 0.0;
};

enum class Scheme { Monopoly, Indifferent, Competition };

const char* to_string(Scheme scheme);

struct WelfareReport {
  double total_time_duopoly = 0.0;   ///< 2 t2
  double total_time_monopoly = 0.0;  ///< t*
  double p_success_duopoly = 0.0;
  double p_success_monopoly = 0.0;
  Scheme preferred = Scheme::Indifferent;
  double threshold_gap = 0.0;  ///< H (p1+p2)/2 - c
};

struct SocialExit {
  double t_hat = 0.0;     ///< socially optimal exit for a single firm
  double per_firm = 0.0;  ///< t_hat / 2, the per-firm analogue with two firms
};

/// Length of the withhold region, ln(H(p1+p2)/(p1 H - p2 mu))/(H+mu).
/// Throws AssumptionError("no disclose region supported") unless p1 H > p2 mu.
double withhold_length(const ModelParams& params);

/// Unique symmetric disclose-withhold-exit cutoffs. Throws AssumptionError
/// when staying is unprofitable at t=0 or no disclose region exists, and
/// NumericalError if the corner bisection loses its bracket.
EquilibriumCutoffs solve_equilibrium(const ModelParams& params);

/// Single-firm abandonment time, clamped at zero.
MonopolyBenchmark monopoly_exit(const ModelParams& params);

/// Probability that stage 1 is ever solved when `n_firms` (1 or 2) research
/// until `exit_time` absent their own success.
double completion_probability(double exit_time, int n_firms,
                              const ModelParams& params);

WelfareReport welfare_compare(const ModelParams& params);

/// `social_value` must be at least p1 + p2.
SocialExit socially_optimal_exit(const ModelParams& params,
                                 double social_value);

struct SweepEntry {
  ModelParams params;
  std::optional<EquilibriumCutoffs> cutoffs;
  std::optional<MonopolyBenchmark> monopoly;
  std::optional<WelfareReport> welfare;
  std::string error;  ///< empty when the point solved

  bool ok() const { return error.empty(); }
};

/// Solves every grid point independently. Failing points carry an error
/// message instead of results; output order follows input order and does
/// not depend on `n_threads` (0 = hardware concurrency).
std::vector<SweepEntry> sweep(const std::vector<ModelParams>& grid,
                              unsigned n_threads = 0);

}  // namespace rndrace
