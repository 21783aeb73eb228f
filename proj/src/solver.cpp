#include "rndrace/solver.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <thread>

#include "rndrace/error.hpp"
#include "rndrace/model.hpp"

namespace rndrace {

namespace {

constexpr double kBisectionTol = 1e-12;
constexpr std::uintmax_t kBisectionMaxIter = 200;
constexpr double kIndifferenceTol = 1e-12;

// Corner case: t1 = 0 and the exit condition is solved for t2 alone.
double solve_corner_exit(const ModelParams& p) {
  const double h = p.stage1_rate;
  const double scale = p.cost_rate / (h * p.total_reward()) *
                       (1.0 - p.prior_feasible) / p.prior_feasible;
  const double upper = -std::log(scale) / h + 10.0 / h;
  auto excess = [&](double t) { return exit_condition_rate(0.0, t, p) - p.cost_rate; };

  const double f_lo = excess(0.0);
  const double f_hi = excess(upper);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    std::ostringstream os;
    os << "exit-condition bracket [0, " << upper << "] lost: f(0)=" << f_lo
       << " f(upper)=" << f_hi << " for " << to_string(p);
    throw NumericalError(os.str());
  }
  std::uintmax_t iters = kBisectionMaxIter;
  auto tol = [](double a, double b) { return std::abs(b - a) <= kBisectionTol; };
  const auto [lo, hi] = boost::math::tools::bisect(excess, 0.0, upper, tol, iters);
  return 0.5 * (lo + hi);
}

int sign_with_tol(double x, double tol) {
  if (std::abs(x) <= tol) return 0;
  return x > 0.0 ? 1 : -1;
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Monopoly: return "Monopoly";
    case Scheme::Indifferent: return "Indifferent";
    case Scheme::Competition: return "Competition";
  }
  return "?";
}

double withhold_length(const ModelParams& p) {
  const double margin = p.reward1 * p.stage1_rate - p.reward2 * p.stage2_rate;
  if (!(margin > 0.0)) throw AssumptionError("no disclose region supported");
  return std::log(p.stage1_rate * p.total_reward() / margin) /
         (p.stage1_rate + p.stage2_rate);
}

EquilibriumCutoffs solve_equilibrium(const ModelParams& p) {
  p.validate();
  const AssumptionReport report = check_assumptions(p);
  if (!report.a1_holds) {
    throw AssumptionError("exit at time zero: alpha*H*(p1+p2) <= c");
  }
  const double window = withhold_length(p);
  const double h = p.stage1_rate;

  // Exit condition solved for e^{H(t1+t2)} with t2 - t1 = window.
  const double unsolved = std::exp(-h * window);
  const double spill = spillover_integral(window, p);
  const double bracket = h * p.total_reward() * (unsolved + 0.5 * spill) / p.cost_rate -
                         (unsolved + spill);

  EquilibriumCutoffs out;
  out.a3_verified = report.a3_holds;
  bool interior = false;
  if (bracket > 0.0) {
    const double sum = (detail::logit(p.prior_feasible) + std::log(bracket)) / h;
    if (sum >= window) {
      out.t1 = 0.5 * (sum - window);
      out.t2 = out.t1 + window;
      interior = true;
    }
  }
  if (!interior) {
    out.corner = true;
    out.t1 = 0.0;
    out.t2 = solve_corner_exit(p);
  }
  out.delta = out.t2 - out.t1;
  out.residual = std::abs(exit_condition_rate(out.t1, out.t2, p) - p.cost_rate);
  return out;
}

MonopolyBenchmark monopoly_exit(const ModelParams& p) {
  p.validate();
  const double gross = p.stage1_rate * p.total_reward();
  if (!(gross > p.cost_rate)) return {0.0};
  const double arg = p.cost_rate / (gross - p.cost_rate) *
                     (1.0 - p.prior_feasible) / p.prior_feasible;
  return {std::max(0.0, -std::log(arg) / p.stage1_rate)};
}

double completion_probability(double exit_time, int n_firms,
                              const ModelParams& p) {
  if (!(exit_time >= 0.0)) throw DomainError("exit_time must be >= 0");
  if (n_firms != 1 && n_firms != 2) throw DomainError("n_firms must be 1 or 2");
  return -p.prior_feasible * std::expm1(-n_firms * p.stage1_rate * exit_time);
}

WelfareReport welfare_compare(const ModelParams& p) {
  const EquilibriumCutoffs eq = solve_equilibrium(p);
  const MonopolyBenchmark mono = monopoly_exit(p);
  WelfareReport r;
  r.total_time_duopoly = 2.0 * eq.t2;
  r.total_time_monopoly = mono.t_star;
  r.p_success_duopoly = completion_probability(eq.t2, 2, p);
  r.p_success_monopoly = completion_probability(mono.t_star, 1, p);
  r.threshold_gap = 0.5 * p.stage1_rate * p.total_reward() - p.cost_rate;
  const int gap_sign = sign_with_tol(r.threshold_gap, kIndifferenceTol);
  r.preferred = gap_sign < 0   ? Scheme::Monopoly
                : gap_sign > 0 ? Scheme::Competition
                               : Scheme::Indifferent;

  const double time_gap = r.total_time_duopoly - r.total_time_monopoly;
  const bool consistent = gap_sign == 0 ? std::abs(time_gap) < 1e-6
                                        : sign_with_tol(time_gap, 0.0) == gap_sign;
  if (!consistent) {
    std::ostringstream os;
    os << "welfare trichotomy violated: 2*t2 - t* = " << time_gap
       << " but H(p1+p2)/2 - c = " << r.threshold_gap;
    throw NumericalError(os.str());
  }
  return r;
}

SocialExit socially_optimal_exit(const ModelParams& p, double social_value) {
  p.validate();
  if (!(social_value >= p.total_reward())) {
    throw DomainError("social value must be at least p1 + p2");
  }
  const double gross = p.stage1_rate * social_value;
  SocialExit out;
  if (gross > p.cost_rate) {
    const double arg = p.cost_rate / (gross - p.cost_rate) *
                       (1.0 - p.prior_feasible) / p.prior_feasible;
    out.t_hat = std::max(0.0, -std::log(arg) / p.stage1_rate);
  }
  out.per_firm = 0.5 * out.t_hat;
  return out;
}

std::vector<SweepEntry> sweep(const std::vector<ModelParams>& grid,
                              unsigned n_threads) {
  std::vector<SweepEntry> out(grid.size());
  auto solve_one = [&](std::size_t i) {
    SweepEntry& e = out[i];
    e.params = grid[i];
    try {
      e.cutoffs = solve_equilibrium(grid[i]);
      e.monopoly = monopoly_exit(grid[i]);
      e.welfare = welfare_compare(grid[i]);
    } catch (const std::exception& ex) {
      e.cutoffs.reset();
      e.monopoly.reset();
      e.welfare.reset();
      e.error = ex.what();
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, grid.size()));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) solve_one(i);
    return out;
  }
  {
    std::vector<std::jthread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += n_threads) solve_one(i);
      });
    }
  }
  return out;
}

}  // namespace rndrace
