#include "rndrace/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rndrace/error.hpp"
#include "rndrace/model.hpp"

namespace rndrace {

namespace {

double require_number(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string("missing field \"") + key + "\"");
  }
  if (!it->is_number()) {
    throw ValidationError(std::string("field \"") + key + "\" must be a number");
  }
  return it->get<double>();
}

Json estimate_json(const Estimate& e) {
  return Json{{"mean", e.mean}, {"std_error", e.std_error}};
}

}  // namespace

ModelParams params_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("parameters must be a JSON object");
  const Json& obj = j.contains("params") ? j.at("params") : j;
  if (!obj.is_object()) throw ValidationError("\"params\" must be a JSON object");
  ModelParams p;
  p.prior_feasible = require_number(obj, "alpha");
  p.stage1_rate = require_number(obj, "H");
  p.stage2_rate = require_number(obj, "mu");
  p.reward1 = require_number(obj, "p1");
  p.reward2 = require_number(obj, "p2");
  p.cost_rate = require_number(obj, "c");
  return p;
}

EquilibriumCutoffs cutoffs_from_json(const Json& j) {
  const Json& c = j.at("cutoffs");
  EquilibriumCutoffs out;
  out.t1 = require_number(c, "t1");
  out.t2 = require_number(c, "t2");
  out.delta = require_number(c, "delta");
  out.residual = require_number(c, "residual");
  out.corner = c.at("corner").get<bool>();
  out.a3_verified = c.at("a3_verified").get<bool>();
  return out;
}

Json to_json(const ModelParams& p) {
  return Json{{"alpha", p.prior_feasible}, {"H", p.stage1_rate}, {"mu", p.stage2_rate},
              {"p1", p.reward1},           {"p2", p.reward2},    {"c", p.cost_rate}};
}

Json to_json(const AssumptionReport& r) {
  auto margin = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"a1_holds", r.a1_holds}, {"a1_margin", r.a1_margin},
              {"a2_holds", r.a2_holds}, {"a2_margin", r.a2_margin},
              {"a3_holds", r.a3_holds}, {"a3_margin", margin(r.a3_margin)}};
}

Json to_json(const EquilibriumCutoffs& c) {
  return Json{{"t1", c.t1},         {"t2", c.t2},           {"delta", c.delta},
              {"corner", c.corner}, {"residual", c.residual}, {"a3_verified", c.a3_verified}};
}

Json to_json(const MonopolyBenchmark& m) { return Json{{"t_star", m.t_star}}; }

Json to_json(const WelfareReport& w) {
  return Json{{"total_time_duopoly", w.total_time_duopoly},
              {"total_time_monopoly", w.total_time_monopoly},
              {"p_success_duopoly", w.p_success_duopoly},
              {"p_success_monopoly", w.p_success_monopoly},
              {"preferred", to_string(w.preferred)},
              {"threshold_gap", w.threshold_gap}};
}

Json to_json(const SocialExit& s) {
  return Json{{"t_hat", s.t_hat}, {"per_firm", s.per_firm}};
}

Json to_json(const CutoffStrategy& s) {
  return Json{{"disclose_until", s.disclose_until},
              {"exit_at", s.exit_at},
              {"planned_disclosure",
               s.planned_disclosure ? Json(*s.planned_disclosure) : Json("never")}};
}

Json to_json(const SimStats& s) {
  return Json{{"n_trials", s.n_trials},
              {"seed", s.seed},
              {"mean_payoff", Json::array({estimate_json(s.mean_payoff[0]),
                                           estimate_json(s.mean_payoff[1])})},
              {"p_stage1_solved", estimate_json(s.p_stage1_solved)},
              {"mean_total_research_time", s.mean_total_research_time}};
}

Json to_json(const DeviationScanReport& r) {
  Json grid = Json::array();
  for (const auto& e : r.grid) {
    grid.push_back(Json{{"strategy", to_json(e.strategy)},
                        {"stats", to_json(e.stats)},
                        {"gain", estimate_json(e.gain)}});
  }
  return Json{{"baseline", to_json(r.baseline)},
              {"grid", std::move(grid)},
              {"best_alternative", r.best_alternative},
              {"equilibrium_confirmed", r.equilibrium_confirmed}};
}

Json to_json(const TrialRecord& r) {
  Json events = Json::array();
  for (const auto& e : r.event_log) {
    events.push_back(Json{{"time", e.time}, {"firm", e.firm}, {"event", to_string(e.kind)}});
  }
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json("never"); };
  return Json{{"lambda_feasible", r.lambda_feasible},
              {"stage1_times", Json::array({opt(r.stage1_times[0]), opt(r.stage1_times[1])})},
              {"event_log", std::move(events)},
              {"payoff", Json::array({r.payoff[0], r.payoff[1]})},
              {"cost", Json::array({r.cost[0], r.cost[1]})},
              {"stage1_solved", r.stage1_solved},
              {"game_end", opt(r.game_end)}};
}

Json to_json(const SweepEntry& e) {
  Json j{{"params", to_json(e.params)}};
  if (e.ok()) {
    j["cutoffs"] = to_json(*e.cutoffs);
    j["monopoly"] = to_json(*e.monopoly);
    j["welfare"] = to_json(*e.welfare);
  } else {
    j["error"] = e.error;
  }
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<CurveRow> equilibrium_curves(const ModelParams& p, const EquilibriumCutoffs& eq,
                                         std::size_t n_points, double t_lo, double t_hi) {
  if (n_points < 2) throw ValidationError("curve grid needs at least 2 points");
  if (!(t_lo >= 0.0) || !(t_hi > t_lo) || !std::isfinite(t_hi)) {
    throw ValidationError("curve range must satisfy 0 <= lo < hi");
  }
  std::vector<double> times;
  times.reserve(n_points + 2);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n_points - 1);
    times.push_back(i + 1 == n_points ? t_hi : t_lo + (t_hi - t_lo) * u);
  }
  for (double cut : {eq.t1, eq.t2}) {
    if (cut >= t_lo && cut <= t_hi) times.push_back(cut);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<CurveRow> rows;
  rows.reserve(times.size());
  for (double t : times) {
    CurveRow r;
    r.t = t;
    r.cost_rate = p.cost_rate;
    if (t <= eq.t1) {
      r.belief = belief_disclose_region(t, p);
      r.disclose_payoff = disclose_payoff(t, eq.t1, p);
      r.withhold_payoff = early_withhold_payoff(t, eq.t1, eq.t2, p);
      r.stay_rate = stay_rate_disclose_region(t, p);
    } else if (t <= eq.t2) {
      r.belief = belief_withhold_region(t, eq.t1, p);
      r.disclose_payoff = disclose_payoff(t, eq.t1, p);
      r.withhold_payoff = withhold_payoff(t, eq.t1, eq.t2, p);
      r.stay_rate = stay_rate_withhold_region(t, eq.t1, eq.t2, p);
    } else {
      const double dt = t - eq.t2;
      r.belief = belief_after_exit(dt, eq.t1, eq.t2, p);
      r.disclose_payoff = after_exit_solve_payoff(dt, eq.t1, eq.t2, p);
      r.withhold_payoff = r.disclose_payoff;
      r.stay_rate = stay_rate_after_exit(dt, eq.t1, eq.t2, p);
    }
    rows.push_back(r);
  }
  return rows;
}

std::string curves_to_csv(const std::vector<CurveRow>& rows) {
  std::string out = kCurveHeader;
  out += '\n';
  for (const auto& r : rows) {
    for (double v : {r.t, r.belief, r.disclose_payoff, r.withhold_payoff, r.stay_rate}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(r.cost_rate);
    out += '\n';
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepEntry>& entries) {
  std::ostringstream os;
  os << "alpha,H,mu,p1,p2,c,status,t1,t2,delta,corner,residual,a3_verified,t_star,"
        "total_time_duopoly,total_time_monopoly,p_success_duopoly,p_success_monopoly,"
        "preferred,threshold_gap,error\n";
  for (const auto& e : entries) {
    const ModelParams& p = e.params;
    for (double v : {p.prior_feasible, p.stage1_rate, p.stage2_rate, p.reward1, p.reward2,
                     p.cost_rate}) {
      os << format_double(v) << ',';
    }
    if (!e.ok()) {
      os << "error,,,,,,,,,,,,,,";
      std::string msg = e.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << '"' << msg << "\"\n";
      continue;
    }
    const auto& c = *e.cutoffs;
    const auto& w = *e.welfare;
    os << "ok," << format_double(c.t1) << ',' << format_double(c.t2) << ','
       << format_double(c.delta) << ',' << (c.corner ? "true" : "false") << ','
       << format_double(c.residual) << ',' << (c.a3_verified ? "true" : "false") << ','
       << format_double(e.monopoly->t_star) << ',' << format_double(w.total_time_duopoly)
       << ',' << format_double(w.total_time_monopoly) << ','
       << format_double(w.p_success_duopoly) << ',' << format_double(w.p_success_monopoly)
       << ',' << to_string(w.preferred) << ',' << format_double(w.threshold_gap) << ",\n";
  }
  return os.str();
}

}  // namespace rndrace
