#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qwalk/battery.hpp"
#include "qwalk/cost_model.hpp"
#include "qwalk/json_io.hpp"
#include "qwalk/qwalk.hpp"

namespace {

using namespace qwalk;

constexpr int kFound = 0, kNone = 1, kError = 2;

struct Config {
  std::string subcommand;
  std::optional<int> n;
  std::uint64_t seed = 1;
  std::optional<int> s1, s2, m;
  std::string mode = "auto";
  std::string instance;
  std::string out;
  int trials = 1;
  bool planted = true;
  std::optional<std::int64_t> value_range;
  int repetitions = 16;
  int max_attempts = 256;
  std::string variant = "exact";
  bool perturb_psi = false;
  int lo = 10, hi = 24;
  std::string objective = "full";
};

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json config_json(const Config& c) {
  Json j;
  j["subcommand"] = c.subcommand;
  j["n"] = opt_json(c.n);
  j["seed"] = c.seed;
  if (c.subcommand == "solve") {
    j["s1"] = opt_json(c.s1);
    j["s2"] = opt_json(c.s2);
    j["m"] = opt_json(c.m);
    j["mode"] = c.mode;
    j["instance"] = c.instance.empty() ? Json(nullptr) : Json(c.instance);
    j["trials"] = c.trials;
    j["planted"] = c.planted;
    j["value_range"] = opt_json(c.value_range);
    j["repetitions"] = c.repetitions;
    j["max_attempts"] = c.max_attempts;
    j["variant"] = c.variant;
  } else if (c.subcommand == "verify") {
    j["perturb_psi"] = c.perturb_psi;
  } else {
    j["lo"] = c.lo;
    j["hi"] = c.hi;
    j["objective"] = c.objective;
  }
  return j;
}

void emit(const Config& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ParameterError("cannot write output file: " + c.out);
  f << text;
}

ModeChoice parse_mode(const std::string& s) {
  if (s == "auto") return ModeChoice::automatic;
  if (s == "abstract") return ModeChoice::abstract;
  if (s == "concrete") return ModeChoice::concrete;
  throw ParameterError("unknown mode: " + s);
}

int cmd_solve(const Config& c) {
  SolveOptions o;
  o.mode = parse_mode(c.mode);
  o.repetitions = c.repetitions;
  o.max_attempts = c.max_attempts;
  o.s1 = c.s1, o.s2 = c.s2, o.m = c.m;
  if (c.variant == "exact") {
    o.outer_variant = ReflectionVariant::exact;
  } else if (c.variant == "pe") {
    o.outer_variant = ReflectionVariant::phase_estimation;
  } else {
    throw ParameterError("unknown variant: " + c.variant + " (exact|pe)");
  }
  if (c.trials < 1) throw ParameterError("--trials must be >= 1");
  std::optional<InstanceFile> file;
  if (!c.instance.empty()) {
    file = read_instance(c.instance);
  } else if (!c.n) {
    throw ParameterError("solve needs --instance or --n");
  }
  Json trials = Json::array();
  int found = 0;
  for (int t = 0; t < c.trials; ++t) {
    const std::uint64_t tseed = c.trials == 1 ? c.seed : derive_seed(c.seed, static_cast<std::uint64_t>(t));
    std::vector<std::int64_t> values;
    std::optional<Triple> planted;
    if (file) {
      values = file->values, planted = file->planted;
    } else {
      const auto n = static_cast<std::size_t>(*c.n);
      auto g = generate_instance(n, c.planted, c.value_range.value_or(4 * static_cast<std::int64_t>(n)),
                                 derive_seed(tseed, 0));
      values = g.first, planted = g.second;
    }
    auto r = solve(values, derive_seed(tseed, 1), o);
    auto oracle = oracle_solve(values);
    Json j;
    j["seed"] = tseed;
    if (!file) j["instance"] = instance_to_json(values, planted);
    Json res = solve_result_to_json(r);
    j["found"] = res["found"];
    j["triple"] = res["triple"];
    j["verified"] = r.triple ? verify_triple(values, *r.triple) : false;
    j["oracle"] = triple_to_json(oracle);
    j["params"] = res["params"];
    j["ledger"] = res["ledger"];
    j["repetitions"] = res["repetitions"];
    found += r.triple.has_value();
    trials.push_back(j);
  }
  Json out;
  out["version"] = kVersion;
  out["config"] = config_json(c);
  out["seed"] = c.seed;
  if (c.trials == 1) {
    for (auto& [k, v] : trials[0].items())
      if (k != "seed") out[k] = v;
  } else {
    out["successes"] = found;
    out["success_rate"] = static_cast<double>(found) / c.trials;
    out["trials"] = trials;
  }
  emit(c, dump(out));
  return found == c.trials ? kFound : kNone;
}

int cmd_verify(const Config& c) {
  BatteryOptions bo;
  bo.perturb_psi = c.perturb_psi;
  auto checks = run_battery(bo);
  Json arr = Json::array();
  bool all = true;
  for (auto& k : checks) {
    arr.push_back(Json{{"name", k.name}, {"pass", k.pass}, {"max_deviation", k.max_deviation}, {"detail", k.detail}});
    all = all && k.pass;
  }
  Json out;
  out["version"] = kVersion;
  out["config"] = config_json(c);
  out["seed"] = c.seed;
  out["pass"] = all;
  out["checks"] = arr;
  emit(c, dump(out));
  return all ? kFound : kNone;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

int cmd_cost(const Config& c) {
  Objective obj;
  if (c.objective == "full") {
    obj = Objective::full;
  } else if (c.objective == "time") {
    obj = Objective::time;
  } else if (c.objective == "dominant") {
    obj = Objective::dominant;
  } else {
    throw ParameterError("unknown objective: " + c.objective + " (full|time|dominant)");
  }
  std::ostringstream os;
  os << "# version " << kVersion << "\n# config " << config_json(c).dump() << "\n# seed " << c.seed << "\n";
  os << "n,s1,s2,cost,term_s1,term_s2_sqrt_n_over_s1,term_n_over_sqrt_s1,term_n_over_sqrt_s2,balance\n";
  auto row = [&](const OptimumPoint& p) {
    const auto& t = p.terms;
    const double hi = std::max({t[0], t[1], t[2], t[3]}), lo = std::min({t[0], t[1], t[2], t[3]});
    os << fmt(p.n) << ',' << fmt(p.s1) << ',' << fmt(p.s2) << ',' << fmt(p.cost) << ',' << fmt(t[0]) << ','
       << fmt(t[1]) << ',' << fmt(t[2]) << ',' << fmt(t[3]) << ',' << fmt(hi / lo) << '\n';
  };
  if (c.n) {
    row(optimize(*c.n, obj));
  } else {
    if (c.lo < 3 || c.hi < c.lo || c.hi > 60) throw ParameterError("need 3 <= --lo <= --hi <= 60");
    auto f = fit_exponents(c.lo, c.hi, obj);
    for (auto& p : f.rows) row(p);
    if (f.rows.size() >= 2)
      os << "# fit s1_slope=" << fmt(f.s1_slope) << " s2_slope=" << fmt(f.s2_slope)
         << " cost_slope=" << fmt(f.cost_slope) << "\n";
  }
  emit(c, os.str());
  return kFound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-walk search simulator with nested updates"};
  app.require_subcommand(1);
  Config c;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "Random seed");
    s->add_option("--out", c.out, "Output path (default stdout)");
  };
  auto* solve = app.add_subcommand("solve", "Solve a 3-Distinctness instance");
  add_common(solve);
  solve->add_option("--n", c.n, "Generated instance length");
  solve->add_option("--s1", c.s1, "Inner set size s1");
  solve->add_option("--s2", c.s2, "Outer set size s2");
  solve->add_option("--m", c.m, "Swap batch size m");
  solve->add_option("--mode", c.mode, "auto|abstract|concrete");
  solve->add_option("--instance", c.instance, "Instance JSON file");
  solve->add_option("--trials", c.trials, "Independent trials");
  solve->add_flag("--planted,!--no-planted", c.planted, "Plant a 3-collision in generated instances");
  solve->add_option("--value-range", c.value_range, "Generated values lie in [1, range]");
  solve->add_option("--repetitions", c.repetitions, "Tripartition repetitions per trial");
  solve->add_option("--max-attempts", c.max_attempts, "Cap on all repetitions, including unusable partitions");
  solve->add_option("--variant", c.variant, "Outer reflection: exact|pe");
  auto* verify = app.add_subcommand("verify", "Run the property battery");
  add_common(verify);
  verify->add_option("--n", c.n, "Unused; echoed");
  verify->add_flag("--perturb-psi", c.perturb_psi, "Perturb one garbage state (negative control)");
  auto* cost = app.add_subcommand("cost", "Optimize the cost expression and fit exponents");
  add_common(cost);
  cost->add_option("--n", c.n, "Single n");
  cost->add_option("--lo", c.lo, "Smallest log2 n");
  cost->add_option("--hi", c.hi, "Largest log2 n");
  cost->add_option("--objective", c.objective, "full|time|dominant");
  cost->add_option("--trials", c.trials, "Unused; echoed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }
  try {
    if (solve->parsed()) {
      c.subcommand = "solve";
      return cmd_solve(c);
    }
    if (verify->parsed()) {
      c.subcommand = "verify";
      return cmd_verify(c);
    }
    c.subcommand = "cost";
    return cmd_cost(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
