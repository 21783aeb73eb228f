// Ex ante value of a strategy pair by direct integration over the two
// stage-1 arrival times. Stage-2 races are exponential, so given both
// arrival times the remaining expectation is closed form. This path shares
// no code with the event-driven simulator.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "rndrace/error.hpp"
#include "rndrace/simulator.hpp"

namespace rndrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pair {
  double first = 0.0;
  double second = 0.0;
};

// Expected (reward - cost) when firm F obtains stage 1 at `a` before firm S
// would at `b` (b may be +inf, meaning S never succeeds before exiting).
Pair first_solver_values(double a, const CutoffStrategy& sf, double b,
                         const CutoffStrategy& ss, const ModelParams& p) {
  const double mu = p.stage2_rate;
  const double total = p.total_reward();
  const double reveal = sf.disclosure_time(a);
  const double next = std::min(reveal, b);

  Pair reward;
  const double pending = next == kInf ? 0.0 : std::exp(-mu * (next - a));
  reward.first += (1.0 - pending) * total;  // F finishes stage 2 first
  if (pending > 0.0) {
    if (b < reveal) {
      reward.first += pending * 0.5 * total;
      reward.second += pending * 0.5 * total;
    } else {
      double present = 1.0;  // probability S is still in the race at `reveal`
      if (b == kInf) {
        present = reveal < ss.exit_at ? 1.0 : reveal > ss.exit_at ? 0.0 : 0.5;
      }
      reward.first += pending * (present * (p.reward1 + 0.5 * p.reward2) +
                                 (1.0 - present) * total);
      reward.second += pending * present * 0.5 * p.reward2;
    }
  }

  // S researches until its own success or exit, F's disclosure, or the end
  // of the game at a + Exp(mu), whichever comes first.
  const double stop = std::min(b == kInf ? ss.exit_at : b, reveal);
  double second_research = stop;
  if (stop > a) {
    second_research = stop == kInf ? a + 1.0 / mu : a - std::expm1(-mu * (stop - a)) / mu;
  }
  return {reward.first - p.cost_rate * a, reward.second - p.cost_rate * second_research};
}

// Value of firm `who` given potential arrival times (+inf for none).
double conditional_value(int who, double a, double b, const CutoffStrategy& sa,
                         const CutoffStrategy& sb, const ModelParams& p) {
  if (a == kInf && b == kInf) {
    return -p.cost_rate * (who == 0 ? sa.exit_at : sb.exit_at);
  }
  if (a < b) {
    const Pair v = first_solver_values(a, sa, b, sb, p);
    return who == 0 ? v.first : v.second;
  }
  const Pair v = first_solver_values(b, sb, a, sa, p);
  return who == 0 ? v.second : v.first;
}

class PiecewiseIntegrator {
 public:
  explicit PiecewiseIntegrator(double tolerance) : tolerance_(tolerance) {}

  template <class F>
  double integrate(F f, double lo, double hi, std::vector<double> cuts) {
    if (!(hi > lo)) return 0.0;
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double prev = lo;
    for (double c : cuts) {
      if (!(c > prev) || c > hi || !std::isfinite(c)) continue;
      double err = 0.0;
      total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
          f, prev, c, 12, tolerance_, &err);
      error_ = std::max(error_, err);
      prev = c;
    }
    return total;
  }

  double error() const { return error_; }

 private:
  double tolerance_;
  double error_ = 0.0;
};

}  // namespace

ExAnteValue ex_ante_value_quadrature(const CutoffStrategy& sa, const CutoffStrategy& sb,
                                     const ModelParams& p, double tolerance) {
  p.validate();
  sa.validate();
  sb.validate();
  const double h = p.stage1_rate;
  const double xa = sa.exit_at;
  const double xb = sb.exit_at;
  auto finite_or_zero = [](const std::optional<double>& v) { return v ? *v : 0.0; };
  const std::vector<double> base_cuts{sa.disclose_until, finite_or_zero(sa.planned_disclosure),
                                      xa, sb.disclose_until,
                                      finite_or_zero(sb.planned_disclosure), xb};

  PiecewiseIntegrator quad(1e-10);
  ExAnteValue out;
  for (int who = 0; who < 2; ++who) {
    auto inner = [&](double a) {
      std::vector<double> cuts = base_cuts;
      if (a < kInf) {
        cuts.push_back(a);
        cuts.push_back(sa.disclosure_time(a));
      }
      auto density_b = [&](double b) {
        return h * std::exp(-h * b) * conditional_value(who, a, b, sa, sb, p);
      };
      return quad.integrate(density_b, 0.0, xb, cuts) +
             std::exp(-h * xb) * conditional_value(who, a, kInf, sa, sb, p);
    };
    auto outer = [&](double a) { return h * std::exp(-h * a) * inner(a); };
    const double feasible =
        quad.integrate(outer, 0.0, xa, base_cuts) + std::exp(-h * xa) * inner(kInf);
    const double own_exit = who == 0 ? xa : xb;
    out.value[who] = p.prior_feasible * feasible -
                     (1.0 - p.prior_feasible) * p.cost_rate * own_exit;
  }
  out.error_estimate = quad.error();
  if (!(out.error_estimate <= tolerance)) {
    std::ostringstream os;
    os << "quadrature did not reach tolerance " << tolerance << " (achieved "
       << out.error_estimate << ")";
    throw NumericalError(os.str());
  }
  return out;
}

}  // namespace rndrace
