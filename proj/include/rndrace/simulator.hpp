#pragma once

// Monte Carlo play-out of the two-firm race under time-cutoff strategies.
//
// Every trial consumes the same fixed set of primitive variates
// (TrialDraws), drawn from a substream keyed by (seed, trial index). Any two
// strategy profiles evaluated with the same seed therefore see common random
// numbers, and results do not depend on the number of worker threads.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rndrace/params.hpp"
#include "rndrace/solver.hpp"

namespace rndrace {

/// A success at s <= disclose_until is disclosed at once; a success at
/// s in (disclose_until, exit_at] is disclosed at max(s, planned_disclosure),
/// or never when planned_disclosure is empty. Without a success by exit_at
/// the firm exits.
struct CutoffStrategy {
  double disclose_until = 0.0;
  double exit_at = 0.0;
  std::optional<double> planned_disclosure;

  void validate() const;
  static CutoffStrategy from_equilibrium(const EquilibriumCutoffs& eq);
  /// Time at which a success obtained at `solve_time` is disclosed
  /// (+inf for never).
  double disclosure_time(double solve_time) const;
};

std::string describe(const CutoffStrategy& s);

enum class EventKind { Solve1, Disclose, Exit, Solve2 };

const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;
  int firm = 0;
  EventKind kind = EventKind::Solve1;
};

/// Primitive randomness of one trial.
struct TrialDraws {
  double feasibility_uniform = 0.0;         ///< feasible iff < alpha
  std::array<double, 2> stage1_unit{};      ///< Exp(1), scaled by 1/H
  std::array<double, 2> stage2_unit{};      ///< Exp(1), scaled by 1/mu
  std::uint64_t tie_bits = 0;               ///< coin flips for exact ties
};

/// Deterministic per-trial generator keyed by (seed, trial index).
std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial);

TrialDraws draw_trial(std::mt19937_64& rng);

struct TrialRecord {
  bool lambda_feasible = false;
  std::array<std::optional<double>, 2> stage1_times;  ///< own Solve1 times
  std::vector<Event> event_log;
  std::array<double, 2> payoff{};  ///< rewards minus research cost
  std::array<double, 2> cost{};
  bool stage1_solved = false;
  std::optional<double> game_end;
  int ties_broken = 0;
};

/// Plays one trial from explicit draws. Firm 0 uses `first`, firm 1 `second`.
TrialRecord play_trial(const TrialDraws& draws, const CutoffStrategy& first,
                       const CutoffStrategy& second, const ModelParams& params);

TrialRecord run_trial(std::mt19937_64& rng, const CutoffStrategy& strat_self,
                      const CutoffStrategy& strat_opp, const ModelParams& params);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SimStats {
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
  std::array<Estimate, 2> mean_payoff{};
  Estimate p_stage1_solved;
  double mean_total_research_time = 0.0;  ///< summed over both firms
};

/// n_threads = 0 uses the hardware concurrency. Output is bit-identical for
/// any thread count.
SimStats estimate(const CutoffStrategy& strat_a, const CutoffStrategy& strat_b,
                  const ModelParams& params, std::uint64_t n_trials,
                  std::uint64_t seed, unsigned n_threads = 0);

/// Deviations evaluated around a candidate strategy. Offsets are applied
/// symmetrically (+o and -o).
struct DeviationGrid {
  std::vector<double> exit_offsets;
  std::vector<double> disclose_offsets;
  /// Finite planned-disclosure times for withhold-then-disclose deviations.
  std::vector<double> planned_disclosures;
  /// Withhold every success until the game ends (disclose_until = 0).
  bool include_withhold_all = false;
};

/// Exit and disclose shifts by `offsets`, planned disclosures spread over
/// (d, x] and over (0, d], and the withhold-everything deviation.
DeviationGrid default_deviation_grid(const CutoffStrategy& candidate,
                                     const std::vector<double>& offsets = {0.05, 0.15});

/// Candidate first, then every distinct deviation of `grid`.
std::vector<CutoffStrategy> expand_grid(const CutoffStrategy& candidate,
                                        const DeviationGrid& grid);

struct DeviationEntry {
  CutoffStrategy strategy;
  SimStats stats;
  /// Mean per-trial payoff gain over the candidate, and the standard error
  /// of that paired difference.
  Estimate gain;
};

struct DeviationScanReport {
  SimStats baseline;
  std::vector<DeviationEntry> grid;  ///< grid[0] is the candidate
  std::size_t best_alternative = 0;
  bool equilibrium_confirmed = true;
};

/// Firm 0 deviates while firm 1 keeps playing `candidate`.
DeviationScanReport best_response_scan(const CutoffStrategy& candidate,
                                       const ModelParams& params,
                                       const DeviationGrid& grid,
                                       std::uint64_t n_trials,
                                       std::uint64_t seed,
                                       unsigned n_threads = 0);

struct ExAnteValue {
  std::array<double, 2> value{};
  double error_estimate = 0.0;
};

/// Expected payoffs of the pair by integrating over both stage-1 arrival
/// times with closed-form stage-2 race values. Independent of the simulator.
ExAnteValue ex_ante_value_quadrature(const CutoffStrategy& strat_a,
                                     const CutoffStrategy& strat_b,
                                     const ModelParams& params,
                                     double tolerance = 1e-6);

}  // namespace rndrace
