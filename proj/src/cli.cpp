#include "rndrace/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rndrace/error.hpp"
#include "rndrace/io.hpp"
#include "rndrace/model.hpp"
#include "rndrace/simulator.hpp"
#include "rndrace/solver.hpp"

namespace rndrace {

namespace {

constexpr const char* kParamKeys[] = {"alpha", "H", "mu", "p1", "p2", "c"};
constexpr std::size_t kDefaultCurvePoints = 512;

struct Options {
  std::string params_file;
  double overrides[6] = {};
  CLI::Option* override_opts[6] = {};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  std::vector<std::string> grid;
  std::string out_file;
  std::string format;
  unsigned threads = 0;
  double exit_at = 0.0;
  double disclose_until = 0.0;
  std::string planned_disclosure;
  double social_value = 0.0;
  CLI::Option* exit_at_opt = nullptr;
  CLI::Option* disclose_until_opt = nullptr;
  CLI::Option* planned_opt = nullptr;
  CLI::Option* social_opt = nullptr;

  bool any_override() const {
    for (auto* o : override_opts) {
      if (o->count() > 0) return true;
    }
    return false;
  }
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ValidationError("invalid number \"" + text + "\" in " + what);
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e7) {
    throw ValidationError("point count in " + what + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

// "lo:hi:n" (inclusive, n points) or "v1,v2,...".
std::vector<double> parse_values(const std::string& spec, const std::string& what) {
  std::vector<double> values;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw ValidationError(what + " must look like lo:hi:n");
    const double lo = parse_number(parts[0], what);
    const double hi = parse_number(parts[1], what);
    const std::size_t n = parse_count(parts[2], what);
    for (std::size_t i = 0; i < n; ++i) {
      values.push_back(n == 1 ? lo
                       : i + 1 == n
                           ? hi
                           : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  } else {
    for (const auto& part : split(spec, ',')) values.push_back(parse_number(part, what));
  }
  if (values.empty()) throw ValidationError(what + " is empty");
  return values;
}

Json load_document(const Options& o) {
  Json doc = Json::object();
  if (!o.params_file.empty()) {
    std::ifstream in(o.params_file);
    if (!in) throw ValidationError("cannot open parameter file \"" + o.params_file + "\"");
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ValidationError("malformed parameter file \"" + o.params_file + "\": " + e.what());
    }
    if (!doc.is_object()) throw ValidationError("parameter file must hold a JSON object");
  }
  Json& target = doc.contains("params") ? doc["params"] : doc;
  if (!target.is_object()) throw ValidationError("\"params\" must be a JSON object");
  for (std::size_t i = 0; i < 6; ++i) {
    if (o.override_opts[i]->count() > 0) target[kParamKeys[i]] = o.overrides[i];
  }
  return doc;
}

ModelParams load_params(const Json& doc) {
  ModelParams p = params_from_json(doc);
  p.validate();
  return p;
}

CutoffStrategy candidate_strategy(const Options& o, const ModelParams& p) {
  const bool fully_given = o.exit_at_opt->count() > 0 && o.disclose_until_opt->count() > 0;
  CutoffStrategy s;
  if (!fully_given) s = CutoffStrategy::from_equilibrium(solve_equilibrium(p));
  if (o.disclose_until_opt->count() > 0) s.disclose_until = o.disclose_until;
  if (o.exit_at_opt->count() > 0) s.exit_at = o.exit_at;
  if (o.planned_opt->count() > 0) {
    if (o.planned_disclosure == "never") {
      s.planned_disclosure.reset();
    } else {
      s.planned_disclosure = parse_number(o.planned_disclosure, "--planned-disclosure");
    }
  }
  s.validate();
  return s;
}

std::string sig6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Flattened "path: value" lines with 6 significant digits.
void render_text(const Json& j, const std::string& path, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      render_text(it.value(), path.empty() ? it.key() : path + "." + it.key(), os);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      render_text(j[i], path + "[" + std::to_string(i) + "]", os);
    }
  } else {
    os << path << ": ";
    if (j.is_number_float()) {
      os << sig6(j.get<double>());
    } else if (j.is_string()) {
      os << j.get<std::string>();
    } else {
      os << j.dump();
    }
    os << '\n';
  }
}

std::string render(const Json& j, const std::string& format) {
  if (format == "text") {
    std::ostringstream os;
    render_text(j, "", os);
    return os.str();
  }
  return j.dump(2) + "\n";
}

void require_format(const std::string& format, std::initializer_list<const char*> allowed,
                    const char* command) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw ValidationError(std::string("format \"") + format + "\" is not available for " +
                        command);
}

std::string cmd_check(const Options& o) {
  require_format(o.format, {"json", "text"}, "check");
  const ModelParams p = load_params(load_document(o));
  return render(Json{{"params", to_json(p)}, {"assumptions", to_json(check_assumptions(p))}},
                o.format);
}

std::string cmd_solve(const Options& o) {
  require_format(o.format, {"json", "text"}, "solve");
  const ModelParams p = load_params(load_document(o));
  const EquilibriumCutoffs eq = solve_equilibrium(p);
  const MonopolyBenchmark m = monopoly_exit(p);
  return render(Json{{"params", to_json(p)}, {"cutoffs", to_json(eq)}, {"monopoly", to_json(m)}},
                o.format);
}

std::string cmd_curves(const Options& o) {
  const Json doc = load_document(o);
  const ModelParams p = load_params(doc);
  // Reuse stored cutoffs unless parameters were overridden on the command line.
  const EquilibriumCutoffs eq = doc.contains("cutoffs") && !o.any_override()
                                    ? cutoffs_from_json(doc)
                                    : solve_equilibrium(p);
  double lo = 0.0;
  double hi = eq.t2 + withhold_length(p);
  std::size_t n = kDefaultCurvePoints;
  if (!o.grid.empty()) {
    if (o.grid.size() != 1) throw ValidationError("curves takes a single --grid");
    const auto parts = split(o.grid.front(), ':');
    if (parts.size() == 1) {
      n = parse_count(parts[0], "--grid");
    } else if (parts.size() == 3) {
      lo = parse_number(parts[0], "--grid");
      hi = parse_number(parts[1], "--grid");
      n = parse_count(parts[2], "--grid");
    } else {
      throw ValidationError("--grid for curves must be n or lo:hi:n");
    }
  }
  const auto rows = equilibrium_curves(p, eq, n, lo, hi);
  if (o.format == "csv") return curves_to_csv(rows);
  if (o.format == "text") {
    std::ostringstream os;
    os << kCurveHeader << '\n';
    for (const auto& r : rows) {
      os << sig6(r.t) << ',' << sig6(r.belief) << ',' << sig6(r.disclose_payoff) << ','
         << sig6(r.withhold_payoff) << ',' << sig6(r.stay_rate) << ',' << sig6(r.cost_rate)
         << '\n';
    }
    return os.str();
  }
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back(Json{{"t", r.t},
                       {"belief", r.belief},
                       {"disclose_payoff", r.disclose_payoff},
                       {"withhold_payoff", r.withhold_payoff},
                       {"stay_rate", r.stay_rate},
                       {"cost_rate", r.cost_rate}});
  }
  return render(Json{{"params", to_json(p)}, {"cutoffs", to_json(eq)}, {"rows", std::move(arr)}},
                o.format);
}

std::string stats_csv_row(const SimStats& s) {
  return std::to_string(s.n_trials) + "," + std::to_string(s.seed) + "," +
         format_double(s.mean_payoff[0].mean) + "," + format_double(s.mean_payoff[0].std_error) +
         "," + format_double(s.mean_payoff[1].mean) + "," +
         format_double(s.mean_payoff[1].std_error) + "," + format_double(s.p_stage1_solved.mean) +
         "," + format_double(s.p_stage1_solved.std_error) + "," +
         format_double(s.mean_total_research_time);
}

constexpr const char* kStatsCsvHeader =
    "n_trials,seed,mean_payoff_0,std_error_0,mean_payoff_1,std_error_1,p_stage1_solved,"
    "p_stage1_solved_se,mean_total_research_time";

std::string strategy_csv(const CutoffStrategy& s) {
  return format_double(s.disclose_until) + "," + format_double(s.exit_at) + "," +
         (s.planned_disclosure ? format_double(*s.planned_disclosure) : std::string("never"));
}

std::string cmd_simulate(const Options& o) {
  require_format(o.format, {"json", "csv", "text"}, "simulate");
  const ModelParams p = load_params(load_document(o));
  const CutoffStrategy s = candidate_strategy(o, p);
  const SimStats stats = estimate(s, s, p, o.trials, o.seed, o.threads);
  if (o.format == "csv") {
    return std::string("disclose_until,exit_at,planned_disclosure,") + kStatsCsvHeader + "\n" +
           strategy_csv(s) + "," + stats_csv_row(stats) + "\n";
  }
  return render(Json{{"seed", o.seed},
                     {"params", to_json(p)},
                     {"strategy", to_json(s)},
                     {"stats", to_json(stats)}},
                o.format);
}

std::string cmd_scan(const Options& o) {
  require_format(o.format, {"json", "csv", "text"}, "scan");
  const ModelParams p = load_params(load_document(o));
  const CutoffStrategy candidate = candidate_strategy(o, p);
  std::vector<double> offsets{0.05, 0.15};
  if (!o.grid.empty()) {
    offsets.clear();
    for (const auto& g : o.grid) {
      for (double v : parse_values(g, "--grid")) offsets.push_back(v);
    }
  }
  const DeviationGrid grid = default_deviation_grid(candidate, offsets);
  const DeviationScanReport report =
      best_response_scan(candidate, p, grid, o.trials, o.seed, o.threads);
  if (o.format == "csv") {
    std::string out = std::string("index,disclose_until,exit_at,planned_disclosure,") +
                      kStatsCsvHeader + ",gain,gain_se\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
      const auto& e = report.grid[i];
      out += std::to_string(i) + "," + strategy_csv(e.strategy) + "," + stats_csv_row(e.stats) +
             "," + format_double(e.gain.mean) + "," + format_double(e.gain.std_error) + "\n";
    }
    return out;
  }
  Json j = to_json(report);
  return render(Json{{"seed", o.seed}, {"params", to_json(p)}, {"report", std::move(j)}},
                o.format);
}

std::string cmd_welfare(const Options& o) {
  require_format(o.format, {"json", "text"}, "welfare");
  const ModelParams p = load_params(load_document(o));
  const EquilibriumCutoffs eq = solve_equilibrium(p);
  Json j{{"params", to_json(p)},
         {"cutoffs", to_json(eq)},
         {"monopoly", to_json(monopoly_exit(p))},
         {"welfare", to_json(welfare_compare(p))}};
  if (o.social_opt->count() > 0) j["social"] = to_json(socially_optimal_exit(p, o.social_value));
  return render(j, o.format);
}

std::string cmd_sweep(const Options& o) {
  require_format(o.format, {"json", "csv", "text"}, "sweep");
  const ModelParams base = load_params(load_document(o));
  if (o.grid.empty()) throw ValidationError("sweep needs at least one --grid name=lo:hi:n");

  std::vector<ModelParams> points{base};
  for (const auto& spec : o.grid) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ValidationError("--grid must look like name=lo:hi:n");
    const std::string name = spec.substr(0, eq);
    const auto values = parse_values(spec.substr(eq + 1), "--grid " + name);
    double ModelParams::*field = nullptr;
    if (name == "alpha") field = &ModelParams::prior_feasible;
    else if (name == "H") field = &ModelParams::stage1_rate;
    else if (name == "mu") field = &ModelParams::stage2_rate;
    else if (name == "p1") field = &ModelParams::reward1;
    else if (name == "p2") field = &ModelParams::reward2;
    else if (name == "c") field = &ModelParams::cost_rate;
    else throw ValidationError("unknown sweep parameter \"" + name + "\"");
    std::vector<ModelParams> next;
    next.reserve(points.size() * values.size());
    for (const auto& pt : points) {
      for (double v : values) {
        ModelParams q = pt;
        q.*field = v;
        next.push_back(q);
      }
    }
    points = std::move(next);
  }
  for (const auto& pt : points) pt.validate();

  const auto entries = sweep(points, o.threads);
  if (o.format == "csv") return sweep_to_csv(entries);
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back(to_json(e));
  return render(Json{{"points", std::move(arr)}}, o.format);
}

void add_common(CLI::App* sub, Options& o, const char* default_format) {
  sub->add_option("--params", o.params_file, "JSON parameter file");
  const char* helps[] = {"prior probability that stage 1 is feasible", "stage-1 success rate",
                         "stage-2 success rate", "stage-1 disclosure reward",
                         "stage-2 completion reward", "flow research cost"};
  for (std::size_t i = 0; i < 6; ++i) {
    o.override_opts[i] =
        sub->add_option(std::string("--") + kParamKeys[i], o.overrides[i], helps[i])
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  sub->add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--grid", o.grid, "grid specification");
  sub->add_option("--out", o.out_file, "write output to this file");
  o.format = default_format;
  sub->add_option("--format", o.format, "json, csv or text")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

void add_strategy(CLI::App* sub, Options& o) {
  o.disclose_until_opt =
      sub->add_option("--disclose-until", o.disclose_until, "candidate disclose cutoff");
  o.exit_at_opt = sub->add_option("--exit-at", o.exit_at, "candidate exit time");
  o.planned_opt = sub->add_option("--planned-disclosure", o.planned_disclosure,
                                  "disclosure time for withheld successes, or never");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disclose-withhold-exit equilibrium of a two-stage R&D race", "rndrace"};
  app.require_subcommand(1, 1);

  struct Command {
    const char* name;
    const char* help;
    const char* format;
    std::string (*run)(const Options&);
  };
  const Command commands[] = {
      {"check", "report the parameter assumptions", "json", cmd_check},
      {"solve", "equilibrium cutoffs and monopoly benchmark", "json", cmd_solve},
      {"curves", "belief, payoff and stay-rate trajectories", "csv", cmd_curves},
      {"simulate", "Monte Carlo statistics of a symmetric profile", "json", cmd_simulate},
      {"scan", "best-response deviation scan", "json", cmd_scan},
      {"welfare", "duopoly versus monopoly comparison", "json", cmd_welfare},
      {"sweep", "solve over a parameter grid", "json", cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  // Each subcommand gets its own Options so defaults do not leak across.
  std::vector<std::unique_ptr<Options>> option_sets;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    option_sets.push_back(std::make_unique<Options>());
    Options& so = *option_sets.back();
    add_common(sub, so, c.format);
    add_strategy(sub, so);
    so.social_opt = sub->add_option("--social-value", so.social_value,
                                    "social value of the innovation (welfare)");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].first->parsed()) continue;
    const Options& so = *option_sets[i];
    try {
      const std::string text = subs[i].second->run(so);
      if (so.out_file.empty()) {
        out << text;
      } else {
        std::ofstream f(so.out_file, std::ios::binary);
        if (!f) throw ValidationError("cannot write \"" + so.out_file + "\"");
        f << text;
        if (!f) throw ValidationError("failed writing \"" + so.out_file + "\"");
      }
      return kExitOk;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    } catch (const DomainError& e) {
      err << "error: " << e.what() << '\n';
      return kExitValidation;
    } catch (const AssumptionError& e) {
      err << "assumption violated: " << e.what() << '\n';
      return kExitAssumption;
    } catch (const NumericalError& e) {
      err << "numerical failure: " << e.what() << '\n';
      return kExitNumerical;
    }
  }
  return kExitValidation;
}

}  // namespace rndrace
