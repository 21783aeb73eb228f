#include "rndrace/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "rndrace/error.hpp"

namespace rndrace {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlockSize = 1u << 14;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Fixed-capacity event list: each firm logs at most Solve1, Disclose, Exit
// or Solve2 once.
struct EventBuffer {
  std::array<Event, 8> events;
  int size = 0;
  void push(double t, int firm, EventKind kind) { events[size++] = {t, firm, kind}; }
};

struct Outcome {
  std::array<double, 2> reward{};
  std::array<double, 2> research_end{};
  std::array<double, 2> own_solve{kNever, kNever};
  bool feasible = false;
  bool stage1_solved = false;
  double game_end = 0.0;
  int ties = 0;
};

// Within one firm, simultaneous events resolve in this order; a success at
// exactly the exit time is kept.
int priority(EventKind k) {
  switch (k) {
    case EventKind::Solve1: return 0;
    case EventKind::Disclose: return 1;
    case EventKind::Solve2: return 2;
    case EventKind::Exit: return 3;
  }
  return 4;
}

struct Pending {
  double time = kNever;
  EventKind kind = EventKind::Exit;
};

Outcome play(const TrialDraws& draws, const std::array<const CutoffStrategy*, 2>& strat,
             const ModelParams& p, EventBuffer* log) {
  Outcome out;
  out.feasible = draws.feasibility_uniform < p.prior_feasible;

  std::array<double, 2> stage1_at{kNever, kNever};
  if (out.feasible) {
    for (int i = 0; i < 2; ++i) stage1_at[i] = draws.stage1_unit[i] / p.stage1_rate;
  }
  std::array<bool, 2> own_solved{false, false};
  std::array<bool, 2> has_solution{false, false};
  std::array<bool, 2> exited{false, false};
  std::array<double, 2> disclose_at{kNever, kNever};
  std::array<double, 2> finish_at{kNever, kNever};
  bool p1_awarded = false;
  std::uint64_t tie_bits = draws.tie_bits;

  auto start_stage2 = [&](int i, double t) {
    has_solution[i] = true;
    out.research_end[i] = t;
    finish_at[i] = t + draws.stage2_unit[i] / p.stage2_rate;
  };
  auto next_event = [&](int i) {
    Pending best;
    auto offer = [&](double t, EventKind k) {
      if (t < best.time || (t == best.time && t < kNever && priority(k) < priority(best.kind))) {
        best = {t, k};
      }
    };
    if (!has_solution[i] && !exited[i]) {
      if (stage1_at[i] <= strat[i]->exit_at) offer(stage1_at[i], EventKind::Solve1);
      offer(strat[i]->exit_at, EventKind::Exit);
    }
    if (own_solved[i] && !p1_awarded) offer(disclose_at[i], EventKind::Disclose);
    if (has_solution[i]) offer(finish_at[i], EventKind::Solve2);
    return best;
  };

  for (;;) {
    const std::array<Pending, 2> cand{next_event(0), next_event(1)};
    if (cand[0].time == kNever && cand[1].time == kNever) break;
    int i = cand[0].time < cand[1].time ? 0 : 1;
    if (cand[0].time == cand[1].time) {
      i = static_cast<int>(tie_bits & 1u);
      tie_bits >>= 1;
      ++out.ties;
    }
    const int j = 1 - i;
    const double t = cand[i].time;
    switch (cand[i].kind) {
      case EventKind::Solve1:
        own_solved[i] = true;
        out.own_solve[i] = t;
        out.stage1_solved = true;
        start_stage2(i, t);
        disclose_at[i] = strat[i]->disclosure_time(t);
        if (log) log->push(t, i, EventKind::Solve1);
        break;
      case EventKind::Disclose:
        p1_awarded = true;
        if (own_solved[j]) {
          out.reward[i] += 0.5 * p.reward1;
          out.reward[j] += 0.5 * p.reward1;
        } else {
          out.reward[i] += p.reward1;
        }
        if (!has_solution[j] && !exited[j]) start_stage2(j, t);
        if (log) log->push(t, i, EventKind::Disclose);
        break;
      case EventKind::Exit:
        exited[i] = true;
        out.research_end[i] = t;
        out.game_end = std::max(out.game_end, t);
        if (log) log->push(t, i, EventKind::Exit);
        break;
      case EventKind::Solve2:
        out.reward[i] += p.reward2;
        if (!p1_awarded) {
          if (own_solved[j]) {
            out.reward[i] += 0.5 * p.reward1;
            out.reward[j] += 0.5 * p.reward1;
          } else {
            out.reward[i] += p.reward1;
          }
        }
        if (!has_solution[j] && !exited[j]) out.research_end[j] = t;
        out.game_end = t;
        if (log) log->push(t, i, EventKind::Solve2);
        return out;
    }
  }
  return out;
}

// Running mean and squared deviations (Welford within a block, Chan et al.
// when merging). Blocks are merged in block order so totals do not depend on
// how blocks are scheduled across threads.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * (o.n / total);
    m2 += o.m2 + d * d * (n * o.n / total);
    n = total;
  }
  Estimate estimate() const {
    if (n < 2.0) return {mean, 0.0};
    return {mean, std::sqrt(m2 / (n - 1.0) / n)};
  }
};

struct ProfileAccumulator {
  std::array<Moments, 2> payoff;
  Moments solved;
  Moments research_time;
  Moments gain;  // payoff of firm 0 minus the baseline profile's firm 0 payoff

  void merge(const ProfileAccumulator& o) {
    payoff[0].merge(o.payoff[0]);
    payoff[1].merge(o.payoff[1]);
    solved.merge(o.solved);
    research_time.merge(o.research_time);
    gain.merge(o.gain);
  }
};

using Profile = std::array<const CutoffStrategy*, 2>;

// Runs every profile on the same draws of each trial.
std::vector<ProfileAccumulator> run_profiles(const std::vector<Profile>& profiles,
                                             const ModelParams& p,
                                             std::uint64_t n_trials,
                                             std::uint64_t seed,
                                             unsigned n_threads) {
  const std::uint64_t n_blocks = (n_trials + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<ProfileAccumulator>> blocks(
      n_blocks, std::vector<ProfileAccumulator>(profiles.size()));

  auto run_block = [&](std::uint64_t b) {
    auto& acc = blocks[b];
    const std::uint64_t begin = b * kBlockSize;
    const std::uint64_t end = std::min(n_trials, begin + kBlockSize);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      auto rng = trial_stream(seed, trial);
      const TrialDraws draws = draw_trial(rng);
      double base = 0.0;
      for (std::size_t k = 0; k < profiles.size(); ++k) {
        const Outcome o = play(draws, profiles[k], p, nullptr);
        const double pay0 = o.reward[0] - p.cost_rate * o.research_end[0];
        const double pay1 = o.reward[1] - p.cost_rate * o.research_end[1];
        if (k == 0) base = pay0;
        acc[k].payoff[0].add(pay0);
        acc[k].payoff[1].add(pay1);
        acc[k].solved.add(o.stage1_solved ? 1.0 : 0.0);
        acc[k].research_time.add(o.research_end[0] + o.research_end[1]);
        acc[k].gain.add(pay0 - base);
      }
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, n_blocks));
  if (n_threads <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::uint64_t b = w; b < n_blocks; b += n_threads) run_block(b);
      });
    }
  }

  std::vector<ProfileAccumulator> total(profiles.size());
  for (const auto& block : blocks) {
    for (std::size_t k = 0; k < profiles.size(); ++k) total[k].merge(block[k]);
  }
  return total;
}

SimStats to_stats(const ProfileAccumulator& acc, std::uint64_t n, std::uint64_t seed) {
  SimStats s;
  s.n_trials = n;
  s.seed = seed;
  s.mean_payoff = {acc.payoff[0].estimate(), acc.payoff[1].estimate()};
  s.p_stage1_solved = acc.solved.estimate();
  s.mean_total_research_time = acc.research_time.mean;
  return s;
}

bool same_strategy(const CutoffStrategy& a, const CutoffStrategy& b) {
  return a.disclose_until == b.disclose_until && a.exit_at == b.exit_at &&
         a.planned_disclosure == b.planned_disclosure;
}

}  // namespace

void CutoffStrategy::validate() const {
  if (!(disclose_until >= 0.0)) throw ValidationError("disclose_until must be >= 0");
  if (!(exit_at >= disclose_until) || !std::isfinite(exit_at)) {
    throw ValidationError("exit_at must be finite and >= disclose_until");
  }
  if (planned_disclosure && !(*planned_disclosure >= disclose_until)) {
    throw ValidationError("planned_disclosure must be >= disclose_until");
  }
}

CutoffStrategy CutoffStrategy::from_equilibrium(const EquilibriumCutoffs& eq) {
  return CutoffStrategy{eq.t1, eq.t2, std::nullopt};
}

double CutoffStrategy::disclosure_time(double solve_time) const {
  if (solve_time <= disclose_until) return solve_time;
  if (!planned_disclosure) return kNever;
  return std::max(solve_time, *planned_disclosure);
}

std::string describe(const CutoffStrategy& s) {
  std::ostringstream os;
  os << "d=" << s.disclose_until << " x=" << s.exit_at << " Tp=";
  if (s.planned_disclosure) {
    os << *s.planned_disclosure;
  } else {
    os << "never";
  }
  return os.str();
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Solve1: return "Solve1";
    case EventKind::Disclose: return "Disclose";
    case EventKind::Exit: return "Exit";
    case EventKind::Solve2: return "Solve2";
  }
  return "?";
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(mix64(mix64(seed) ^ trial));
}

TrialDraws draw_trial(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> unit_exp(1.0);
  TrialDraws d;
  d.feasibility_uniform = uniform(rng);
  d.stage1_unit = {unit_exp(rng), unit_exp(rng)};
  d.stage2_unit = {unit_exp(rng), unit_exp(rng)};
  d.tie_bits = rng();
  return d;
}

TrialRecord play_trial(const TrialDraws& draws, const CutoffStrategy& first,
                       const CutoffStrategy& second, const ModelParams& p) {
  EventBuffer buffer;
  const Outcome o = play(draws, {&first, &second}, p, &buffer);
  TrialRecord r;
  r.lambda_feasible = o.feasible;
  for (int i = 0; i < 2; ++i) {
    if (o.own_solve[i] < kNever) r.stage1_times[i] = o.own_solve[i];
    r.cost[i] = p.cost_rate * o.research_end[i];
    r.payoff[i] = o.reward[i] - r.cost[i];
  }
  r.event_log.assign(buffer.events.begin(), buffer.events.begin() + buffer.size);
  r.stage1_solved = o.stage1_solved;
  r.game_end = o.game_end;
  r.ties_broken = o.ties;
  return r;
}

TrialRecord run_trial(std::mt19937_64& rng, const CutoffStrategy& strat_self,
                      const CutoffStrategy& strat_opp, const ModelParams& p) {
  strat_self.validate();
  strat_opp.validate();
  return play_trial(draw_trial(rng), strat_self, strat_opp, p);
}

SimStats estimate(const CutoffStrategy& strat_a, const CutoffStrategy& strat_b,
                  const ModelParams& p, std::uint64_t n_trials, std::uint64_t seed,
                  unsigned n_threads) {
  p.validate();
  strat_a.validate();
  strat_b.validate();
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  const auto acc = run_profiles({Profile{&strat_a, &strat_b}}, p, n_trials, seed, n_threads);
  return to_stats(acc[0], n_trials, seed);
}

DeviationGrid default_deviation_grid(const CutoffStrategy& c,
                                     const std::vector<double>& offsets) {
  DeviationGrid g;
  g.exit_offsets = offsets;
  g.disclose_offsets = offsets;
  const double d = c.disclose_until;
  const double x = c.exit_at;
  if (x > d) {
    for (double f : {0.25, 0.5, 1.0}) g.planned_disclosures.push_back(d + f * (x - d));
  }
  g.include_withhold_all = true;
  return g;
}

std::vector<CutoffStrategy> expand_grid(const CutoffStrategy& c, const DeviationGrid& g) {
  std::vector<CutoffStrategy> out{c};
  auto add = [&](CutoffStrategy s) {
    if (s.planned_disclosure && *s.planned_disclosure < s.disclose_until) {
      s.planned_disclosure = s.disclose_until;
    }
    for (const auto& e : out) {
      if (same_strategy(e, s)) return;
    }
    out.push_back(s);
  };
  for (double o : g.exit_offsets) {
    for (double signed_o : {-o, o}) {
      const double x = c.exit_at + signed_o;
      if (x < 0.0) continue;
      add({std::min(c.disclose_until, x), x, c.planned_disclosure});
    }
  }
  for (double o : g.disclose_offsets) {
    for (double signed_o : {-o, o}) {
      const double d = std::clamp(c.disclose_until + signed_o, 0.0, c.exit_at);
      add({d, c.exit_at, c.planned_disclosure});
    }
  }
  for (double tp : g.planned_disclosures) {
    if (tp > c.disclose_until) {
      add({c.disclose_until, c.exit_at, tp});
    } else if (tp > 0.0) {
      // Withhold an early success until tp, then disclose.
      add({0.0, c.exit_at, tp});
    }
  }
  if (g.include_withhold_all) add({0.0, c.exit_at, std::nullopt});
  return out;
}

DeviationScanReport best_response_scan(const CutoffStrategy& candidate,
                                       const ModelParams& p, const DeviationGrid& grid,
                                       std::uint64_t n_trials, std::uint64_t seed,
                                       unsigned n_threads) {
  p.validate();
  candidate.validate();
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  const std::vector<CutoffStrategy> strategies = expand_grid(candidate, grid);
  for (const auto& s : strategies) s.validate();

  std::vector<Profile> profiles;
  profiles.reserve(strategies.size());
  for (const auto& s : strategies) profiles.push_back({&s, &candidate});
  const auto acc = run_profiles(profiles, p, n_trials, seed, n_threads);

  DeviationScanReport report;
  report.baseline = to_stats(acc[0], n_trials, seed);
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    report.grid.push_back({strategies[k], to_stats(acc[k], n_trials, seed),
                           acc[k].gain.estimate()});
  }
  report.best_alternative = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < report.grid.size(); ++k) {
    if (report.grid[k].stats.mean_payoff[0].mean > best) {
      best = report.grid[k].stats.mean_payoff[0].mean;
      report.best_alternative = k;
    }
  }
  report.equilibrium_confirmed = true;
  for (const auto& e : report.grid) {
    if (e.gain.mean > 3.0 * e.gain.std_error) report.equilibrium_confirmed = false;
  }
  return report;
}

}  // namespace rndrace
