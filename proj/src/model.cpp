#include "rndrace/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rndrace/error.hpp"

namespace rndrace {

namespace detail {

bool rates_degenerate(const ModelParams& p) {
  const double gap = std::abs(p.stage1_rate - p.stage2_rate);
  return gap < kDegenerateRateGap * std::max(p.stage1_rate, p.stage2_rate);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double relative_growth(double tau, const ModelParams& p) {
  if (rates_degenerate(p)) return tau * std::exp(0.5 * (p.stage1_rate - p.stage2_rate) * tau);
  const double gap = p.stage1_rate - p.stage2_rate;
  return std::expm1(gap * tau) / gap;
}

double log_spillover(double tau, const ModelParams& p) {
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  if (tau <= 0.0) return -std::numeric_limits<double>::infinity();
  if (rates_degenerate(p)) return std::log(h) + std::log(tau) - 0.5 * (h + mu) * tau;
  const double gap = h - mu;
  if (gap > 0.0) {
    return std::log(h) - mu * tau + std::log(-std::expm1(-gap * tau) / gap);
  }
  return std::log(h) - h * tau + std::log(std::expm1(gap * tau) / gap);
}

double log_silent_mass(double tau, const ModelParams& p) {
  if (tau <= 0.0) return 0.0;
  return log_add_exp(-p.stage1_rate * tau, log_spillover(tau, p));
}

double unsolved_share(double tau, const ModelParams& p) {
  if (tau <= 0.0) return 1.0;
  return std::exp(-p.stage1_rate * tau - log_silent_mass(tau, p));
}

double withhold_continuation(double r, const ModelParams& p) {
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  const double k = h + mu;
  return 0.5 * p.total_reward() *
         (h / k * std::exp(-k * r) + (h + 2.0 * mu) / k);
}

}  // namespace detail

namespace {

using detail::logistic;
using detail::logit;

void require_time(double t, const char* what) {
  if (!(t >= 0.0)) {
    std::ostringstream os;
    os << what << " must be a non-negative time (got " << t << ")";
    throw DomainError(os.str());
  }
}

void require_window(double t, double t1, double t2) {
  require_time(t1, "t1");
  if (!(t >= t1 && t <= t2)) {
    std::ostringstream os;
    os << "t=" << t << " outside the withhold region [" << t1 << ", " << t2
       << "]";
    throw DomainError(os.str());
  }
}

// log of the posterior odds factor shared by the withhold-region belief and
// stay rate: logit(alpha) - 2 H t1 - H tau + log(e^{-H tau} + I(tau)).
double withhold_log_odds(double tau, double t1, const ModelParams& p) {
  const double h = p.stage1_rate;
  return logit(p.prior_feasible) - 2.0 * h * t1 - h * tau +
         detail::log_silent_mass(tau, p);
}

// log(e^{-H D} + I(D) e^{-mu dt}) for the post-exit state, D = t2 - t1.
double post_exit_log_mass(double dt, double window, const ModelParams& p) {
  return detail::log_add_exp(
      -p.stage1_rate * window,
      detail::log_spillover(window, p) - p.stage2_rate * dt);
}

}  // namespace

AssumptionReport check_assumptions(const ModelParams& p) {
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  const double total = p.total_reward();
  AssumptionReport r;
  r.a1_margin = p.prior_feasible * h * total - p.cost_rate;
  r.a1_holds = r.a1_margin > 0.0;
  r.a2_margin = p.reward1 * h - p.reward2 * mu;
  r.a2_holds = r.a2_margin > 0.0;
  if (!r.a2_holds) {
    r.a3_margin = std::numeric_limits<double>::quiet_NaN();
    r.a3_holds = false;
    return r;
  }
  const double ratio = h * total / r.a2_margin;
  const double k = h + mu;
  const double pow_h = std::pow(ratio, -h / k);
  const double pow_mu = std::pow(ratio, -mu / k);
  const double rhs = std::pow(ratio, h / k);
  double lhs = 0.0;
  if (detail::rates_degenerate(p)) {
    // The general form divides by H - mu; use its H == mu limit.
    const double window = std::log(ratio) / k;
    const double spill = spillover_integral(window, p);
    lhs = h * total * (pow_h + 0.5 * spill) / p.cost_rate - (pow_h + spill);
  } else {
    const double gap = h - mu;
    lhs = h * total * ((0.5 * h - mu) / gap * pow_h + 0.5 * h / gap * pow_mu) /
              p.cost_rate +
          mu / gap * pow_h - h / gap * pow_mu;
  }
  r.a3_margin = lhs - rhs;
  r.a3_holds = r.a3_margin >= 0.0;
  return r;
}

double spillover_integral(double tau, const ModelParams& p) {
  require_time(tau, "tau");
  if (tau == 0.0) return 0.0;
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  // Midpoint rate: the neglected term is O((h-mu)^2 tau^3).
  if (detail::rates_degenerate(p)) return h * tau * std::exp(-0.5 * (h + mu) * tau);
  const double gap = h - mu;
  if (gap > 0.0) return h * std::exp(-mu * tau) * -std::expm1(-gap * tau) / gap;
  return h * std::exp(-h * tau) * std::expm1(gap * tau) / gap;
}

double belief_disclose_region(double t, const ModelParams& p) {
  require_time(t, "t");
  return logistic(logit(p.prior_feasible) - 2.0 * p.stage1_rate * t);
}

double belief_withhold_region(double t, double t1, const ModelParams& p) {
  require_time(t1, "t1");
  if (!(t >= t1)) throw DomainError("belief_withhold_region requires t >= t1");
  return logistic(withhold_log_odds(t - t1, t1, p));
}

double belief_after_exit(double dt, double t1, double t2,
                         const ModelParams& p) {
  require_time(dt, "dt");
  require_window(t2, t1, t2);
  const double h = p.stage1_rate;
  const double window = t2 - t1;
  return logistic(logit(p.prior_feasible) - 2.0 * h * t1 -
                  h * (window + dt) + post_exit_log_mass(dt, window, p));
}

double disclose_payoff(double t, double t1, const ModelParams& p) {
  require_time(t, "t");
  const double immediate = p.reward1 + 0.5 * p.reward2;
  if (t <= t1) return immediate;
  const double w = detail::unsolved_share(t - t1, p);
  return w * immediate + (1.0 - w) * 0.5 * p.total_reward();
}

double withhold_payoff(double t, double t1, double t2, const ModelParams& p) {
  require_window(t, t1, t2);
  const double w = detail::unsolved_share(t - t1, p);
  return (1.0 - w) * 0.5 * p.total_reward() +
         w * detail::withhold_continuation(t2 - t, p);
}

double early_withhold_payoff(double t, double t1, double t2,
                             const ModelParams& p) {
  require_time(t, "t");
  if (!(t <= t1 && t1 <= t2)) {
    throw DomainError("early_withhold_payoff requires t <= t1 <= t2");
  }
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  const double k = h + mu;
  const double survive = std::exp(-k * (t1 - t));
  const double race = p.total_reward() * (mu + 0.5 * h) / k;
  return survive * detail::withhold_continuation(t2 - t1, p) +
         (1.0 - survive) * race;
}

double withhold_minus_disclose(double t, double t1, double t2,
                               const ModelParams& p) {
  require_window(t, t1, t2);
  const double h = p.stage1_rate;
  const double mu = p.stage2_rate;
  const double k = h + mu;
  const double numerator = -0.5 * h / k * p.reward1 + 0.5 * mu / k * p.reward2 +
                           p.total_reward() * 0.5 * h / k *
                               std::exp(-k * (t2 - t));
  const double denominator = 1.0 + h * detail::relative_growth(t - t1, p);
  return numerator / denominator;
}

double stay_rate_disclose_region(double t, const ModelParams& p) {
  return belief_disclose_region(t, p) * p.stage1_rate * p.total_reward();
}

double stay_rate_withhold_region(double t, double t1, double t2,
                                 const ModelParams& p) {
  require_window(t, t1, t2);
  if (!(t > t1)) {
    throw DomainError("stay_rate_withhold_region requires t > t1");
  }
  // Numerator and denominator of the closed form share the factor
  // alpha e^{-2H t1 - H tau}; dividing it out leaves belief * H * payoff.
  const double tau = t - t1;
  const double w = detail::unsolved_share(tau, p);
  const double payoff = (1.0 - w) * 0.5 * p.total_reward() +
                        w * detail::withhold_continuation(t2 - t, p);
  return p.stage1_rate * payoff * logistic(withhold_log_odds(tau, t1, p));
}

double after_exit_solve_payoff(double dt, double t1, double t2,
                               const ModelParams& p) {
  require_time(dt, "dt");
  require_window(t2, t1, t2);
  const double window = t2 - t1;
  const double share =
      std::exp(-p.stage1_rate * window - post_exit_log_mass(dt, window, p));
  return 0.5 * p.total_reward() * (1.0 + share);
}

double stay_rate_after_exit(double dt, double t1, double t2,
                            const ModelParams& p) {
  return p.stage1_rate * belief_after_exit(dt, t1, t2, p) *
         after_exit_solve_payoff(dt, t1, t2, p);
}

double exit_condition_rate(double t1, double t2, const ModelParams& p) {
  return stay_rate_after_exit(0.0, t1, t2, p);
}

}  // namespace rndrace
