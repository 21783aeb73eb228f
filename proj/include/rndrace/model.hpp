#pragma once

// Closed-form quantities of the disclose-withhold-exit game: beliefs about
// stage-1 feasibility, payoffs of disclosing vs withholding a stage-1
// success, and the instantaneous benefit rate of staying in the race.
//
// Time arguments are calendar times. `t1` is the end of the disclose
// region and `t2` the exit time of a firm without a stage-1 success.
// Every function is pure and may be called concurrently.

#include "rndrace/params.hpp"

namespace rndrace {

/// Relative rate gap below which H and mu are treated as equal.
inline constexpr double kDegenerateRateGap = 1e-9;

AssumptionReport check_assumptions(const ModelParams& params);

/// Probability (given feasibility) that the opponent solved stage 1 within
/// an elapsed window `tau` but has not yet solved stage 2.
double spillover_integral(double tau, const ModelParams& params);

/// Posterior that stage 1 is feasible at time t, absent any disclosure,
/// while both firms disclose immediately.
double belief_disclose_region(double t, const ModelParams& params);

/// Posterior at t >= t1 when successes after t1 are withheld.
double belief_withhold_region(double t, double t1, const ModelParams& params);

/// Posterior of a firm still researching `dt` after the exit time t2.
double belief_after_exit(double dt, double t1, double t2,
                         const ModelParams& params);

/// Expected payoff of a firm that has just solved stage 1 at t and
/// discloses immediately. Constant p1 + p2/2 on [0, t1].
double disclose_payoff(double t, double t1, const ModelParams& params);

/// Expected payoff of a firm that solved stage 1 at t in [t1, t2] and
/// withholds until the game ends.
double withhold_payoff(double t, double t1, double t2,
                       const ModelParams& params);

/// Payoff of withholding a success obtained at t in [0, t1] until the game
/// ends, with the opponent playing the cutoff profile (t1, t2).
double early_withhold_payoff(double t, double t1, double t2,
                             const ModelParams& params);

/// withhold_payoff - disclose_payoff on [t1, t2], in simplified form.
double withhold_minus_disclose(double t, double t1, double t2,
                               const ModelParams& params);

/// Benefit rate of staying for another instant in [0, t1]:
/// belief * H * (p1 + p2).
double stay_rate_disclose_region(double t, const ModelParams& params);

/// Benefit rate of staying at t in (t1, t2] while withholding.
double stay_rate_withhold_region(double t, double t1, double t2,
                                 const ModelParams& params);

/// Benefit rate of staying `dt` past t2 against an opponent that exited.
double stay_rate_after_exit(double dt, double t1, double t2,
                            const ModelParams& params);

/// Expected payoff of a stage-1 success obtained `dt` after t2.
double after_exit_solve_payoff(double dt, double t1, double t2,
                               const ModelParams& params);

/// Right-hand side of the exit condition for exit time t2 and disclose
/// cutoff t1 (equal to stay_rate_withhold_region(t2, t1, t2)).
double exit_condition_rate(double t1, double t2, const ModelParams& params);

namespace detail {

bool rates_degenerate(const ModelParams& params);
double logit(double p);
double logistic(double x);
double log_add_exp(double a, double b);
/// (exp((H-mu) tau) - 1) / (H - mu), with limit tau when H == mu.
double relative_growth(double tau, const ModelParams& params);
double log_spillover(double tau, const ModelParams& params);
/// log(exp(-H tau) + spillover_integral(tau)).
double log_silent_mass(double tau, const ModelParams& params);
/// exp(-H tau) / (exp(-H tau) + spillover_integral(tau)).
double unsolved_share(double tau, const ModelParams& params);
/// Payoff of withholding when the opponent has not solved and exits in `r`.
double withhold_continuation(double r, const ModelParams& params);

}  // namespace detail

}  // namespace rndrace
