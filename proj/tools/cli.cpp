#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "reuse/benchmark.hpp"
#include "reuse/coupling.hpp"
#include "reuse/errors.hpp"
#include "reuse/experiments.hpp"
#include "reuse/instance.hpp"
#include "reuse/instance_io.hpp"
#include "reuse/oracle.hpp"

namespace reuse::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Raised for configuration errors detected after flag parsing.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an instance file is well formed but violates the model.
struct ValidationFailure : std::runtime_error {
  explicit ValidationFailure(std::vector<std::string> v)
      : std::runtime_error("instance failed validation"), violations(std::move(v)) {}
  std::vector<std::string> violations;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("REUSE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("REUSE_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

struct Common {
  std::string format = "json";
  bool force = false;
  std::optional<double> max_states;
  std::optional<int> max_geometric;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string command;
  json config = json::object();

  json header() const {
    return {{"tool", "reuse"}, {"version", kToolVersion}, {"command", command},
            {"config", config}, {"index_base", 1}};
  }

  void csv_header(const std::string& schema, const std::string& extra = {}) const {
    out << "# tool=reuse version=" << kToolVersion << " command=" << command
        << " csv_schema=" << schema << '\n';
    out << "# config=" << config.dump() << '\n';
    out << "# resources and steps are 1-based (file indices are 0-based)\n";
    if (!extra.empty()) out << extra;
  }
};

void add_common(CLI::App* sub, Common& c, bool guards) {
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  if (guards) {
    sub->add_flag("--force", c.force, "lift the state-space guard (prints a memory estimate)");
    sub->add_option("--max-states", c.max_states, "age-augmented state limit (needs --force)");
    sub->add_option("--max-geometric", c.max_geometric,
                    "geometric resource limit (needs --force)");
  }
}

GuardLimits limits_from(const Common& c) {
  GuardLimits g;
  if ((c.max_states || c.max_geometric) && !c.force) {
    throw ConfigError("guard overrides require --force");
  }
  if (c.max_states) g.max_states = *c.max_states;
  if (c.max_geometric) g.max_geometric_resources = *c.max_geometric;
  if (c.force && !c.max_states && !c.max_geometric) g.force = true;
  return g;
}

void echo_common(Context& ctx, const Common& c) {
  ctx.config["format"] = c.format;
  ctx.config["force"] = c.force;
  if (c.max_states) ctx.config["max_states"] = *c.max_states;
  if (c.max_geometric) ctx.config["max_geometric"] = *c.max_geometric;
}

Instance load_valid(const std::string& path) {
  Instance raw = load_instance(path);
  auto report = validate(raw);
  if (!report.ok()) throw ValidationFailure(std::move(report.violations));
  return canonicalize(raw);
}

void announce_memory(Context& ctx, const Instance& inst, const GuardLimits& g) {
  if (!g.force && !ctx.config.contains("max_states") && !ctx.config.contains("max_geometric")) {
    return;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "guard override: %.0f states, estimated memory %.1f MiB\n",
                state_space_size(inst), estimated_dp_bytes(inst) / (1024.0 * 1024.0));
  ctx.err << buf;
}

Policy parse_policy(const std::string& spec) {
  if (spec == "greedy") return greedy_policy();
  if (spec.rfind("alpha:", 0) == 0) {
    try {
      return alpha_threshold_policy(std::stod(spec.substr(6)));
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad policy '" + spec + "' (alpha must lie in [0, 1])");
    }
  }
  throw ConfigError("unknown policy '" + spec + "' (use greedy or alpha:<a>)");
}

CouplingScheme parse_scheme(const std::string& s) {
  return s == "bernoulli" ? CouplingScheme::kBernoulli : CouplingScheme::kStack;
}

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci95", {e.ci_lo, e.ci_hi}}};
}

// ---------------------------------------------------------------------------

int cmd_validate(Context& ctx, const std::string& path) {
  const Instance raw = load_instance(path);
  const auto report = validate(raw);
  for (const auto& v : report.violations) ctx.out << "violation: " << v << '\n';
  for (const auto& n : report.notes) ctx.out << "note: " << n << '\n';
  if (!report.ok()) return kValidation;
  ctx.out << "ok: N=" << raw.size() << " T=" << raw.horizon()
          << " hash=" << hex(instance_hash(canonicalize(raw))) << '\n';
  return kOk;
}

int cmd_solve(Context& ctx, const std::string& path, const Common& c) {
  const Instance inst = load_valid(path);
  const GuardLimits g = limits_from(c);
  announce_memory(ctx, inst, g);
  const ValueTable table = solve_opt(inst, g);
  const double greedy = evaluate_policy(inst, greedy_policy(), g);
  const double opt = table.opt_value();
  const double ratio = opt > 0.0 ? greedy / opt : 1.0;
  const double p = p_min(inst);
  const bool geometric = inst.all_geometric();

  struct Row {
    Bound bound;
    double value;
    double margin;
    bool pass;
  };
  std::vector<Row> rows;
  for (Bound b : {Bound::kTheorem1, Bound::kTheorem2}) {
    if (b == Bound::kTheorem2 && !geometric) continue;
    const double v = bound_value(b, p);
    rows.push_back({b, v, ratio - v, ratio - v >= -kReportTolerance});
  }
  const bool pass = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });

  if (c.format == "json") {
    json j = ctx.header();
    j["instance_hash"] = hex(instance_hash(inst));
    j["N"] = inst.size();
    j["T"] = inst.horizon();
    j["p_min"] = p;
    j["geometric"] = geometric;
    j["opt"] = opt;
    j["greedy"] = greedy;
    j["ratio"] = ratio;
    j["bounds"] = json::array();
    for (const auto& r : rows) {
      j["bounds"].push_back(
          {{"name", to_string(r.bound)}, {"value", r.value}, {"margin", r.margin}, {"pass", r.pass}});
    }
    j["pass"] = pass;
    ctx.out << j.dump(2) << '\n';
  } else {
    ctx.csv_header("solve/1");
    ctx.out << "instance_hash,N,T,p_min,opt,greedy,ratio,theorem1_bound,theorem1_margin,"
               "theorem1_pass,theorem2_bound,theorem2_margin,theorem2_pass\n";
    ctx.out << hex(instance_hash(inst)) << ',' << inst.size() << ',' << inst.horizon() << ','
            << num(p) << ',' << num(opt) << ',' << num(greedy) << ',' << num(ratio);
    for (Bound b : {Bound::kTheorem1, Bound::kTheorem2}) {
      const auto it = std::find_if(rows.begin(), rows.end(), [b](const Row& r) { return r.bound == b; });
      if (it == rows.end()) {
        ctx.out << ",,,";
      } else {
        ctx.out << ',' << num(it->value) << ',' << num(it->margin) << ',' << (it->pass ? 1 : 0);
      }
    }
    ctx.out << '\n';
  }
  return kOk;
}

int cmd_couple(Context& ctx, const std::string& path, const Common& c, const std::string& scheme_s,
               int runs, std::uint64_t seed, const std::string& policy_s) {
  if (runs < 1) throw ConfigError("--runs must be >= 1");
  const Instance inst = load_valid(path);
  const GuardLimits g = limits_from(c);
  announce_memory(ctx, inst, g);
  const CouplingScheme scheme = parse_scheme(scheme_s);
  const Policy primary = parse_policy(policy_s);
  const Policy bench = opt_policy(std::make_shared<const ValueTable>(solve_opt(inst, g)));

  if (runs == 1) {
    const CoupledTrace trace = coupled_run(inst, primary, bench, scheme, seed);
    json h = ctx.header();
    h["record"] = "config";
    h["instance_hash"] = hex(instance_hash(inst));
    h["seed"] = seed;
    ctx.out << h.dump() << '\n' << trace_to_jsonl(trace, inst);
    return kOk;
  }
  const EstimateReport rep = monte_carlo(inst, primary, bench, scheme, runs, seed);
  const std::vector<std::pair<const char*, const Estimate*>> cols = {
      {"primary_reward", &rep.primary_reward},
      {"benchmark_reward", &rep.benchmark_reward},
      {"lost", &rep.lost},
      {"best_available", &rep.best_available},
      {"coincidence_reward", &rep.coincidence_reward}};
  if (c.format == "json") {
    json j = ctx.header();
    j["instance_hash"] = hex(instance_hash(inst));
    j["seed"] = seed;
    j["runs"] = runs;
    j["coupling"] = to_string(scheme);
    j["policy"] = primary.name;
    for (const auto& [name, e] : cols) j["estimates"][name] = estimate_json(*e);
    ctx.out << j.dump(2) << '\n';
  } else {
    ctx.csv_header("couple/1", "# instance_hash=" + hex(instance_hash(inst)) + "\n");
    ctx.out << "quantity,mean,std_error,ci_lo,ci_hi\n";
    for (const auto& [name, e] : cols) {
      ctx.out << name << ',' << num(e->mean) << ',' << num(e->std_error) << ',' << num(e->ci_lo)
              << ',' << num(e->ci_hi) << '\n';
    }
  }
  return kOk;
}

int cmd_oracle(Context& ctx, const std::string& path, const Common& c, std::string scheme_s,
               const std::string& policy_s) {
  const Instance inst = load_valid(path);
  const GuardLimits g = limits_from(c);
  if (scheme_s.empty()) scheme_s = inst.all_geometric() ? "bernoulli" : "stack";
  ctx.config["coupling"] = scheme_s;
  const Policy primary = parse_policy(policy_s);
  const Policy bench = opt_policy(std::make_shared<const ValueTable>(solve_opt(inst, g)));
  const bool bernoulli = scheme_s == "bernoulli";
  const ExactEventTable table = bernoulli ? enumerate_bernoulli(inst, primary, bench)
                                          : enumerate_stack(inst, primary, bench);
  std::optional<CheckReport> lemma;
  if (bernoulli) lemma = lemma1_check(table, inst);
  const LostBounds lb = check_lost_bounds(table, inst);

  auto bound_json = [](const BoundCheck& b) {
    return json{{"lhs", b.lhs}, {"rhs", b.rhs}, {"applicable", b.applicable}, {"pass", b.pass}};
  };
  if (c.format == "json") {
    json j = ctx.header();
    j["instance_hash"] = hex(instance_hash(inst));
    j["policy"] = primary.name;
    j["atoms"] = table.atoms;
    j["atom_mass"] = table.atom_mass;
    j["primary_reward"] = table.primary_reward;
    j["benchmark_reward"] = table.benchmark_reward;
    j["lost"] = table.lost;
    j["retained"] = table.retained;
    j["best_available"] = table.best_available;
    j["coincidence_reward"] = table.coincidence_reward;
    j["claim1_violations"] = table.claim1_violations;
    j["claim2_violations"] = table.claim2_violations;
    j["bounds"] = {{"decomposition", bound_json(lb.decomposition)},
                   {"lost_weak", bound_json(lb.weak)},
                   {"lost_geometric", bound_json(lb.geometric)},
                   {"lost_coincidence", bound_json(lb.coincidence)}};
    j["cells"] = json::array();
    for (int i = 0; i < table.resources; ++i) {
      for (int t = 0; t < table.horizon; ++t) {
        const auto k = table.cell(i, t);
        json cell = {{"resource", i + 1},
                     {"t", t + 1},
                     {"pr_bench_match", table.bench_match_prob[k]},
                     {"pr_lost", table.lost_prob[k]},
                     {"pr_coincide", table.coincide_prob[k]},
                     {"pr_below", table.below_prob[k]},
                     {"pr_f_not_fstar", table.f_not_fstar_prob[k]}};
        if (lemma) {
          const auto* lc = lemma->find(i, t);
          cell["lemma1_rhs"] = lc->rhs;
          cell["lemma1_margin"] = lc->margin;
          cell["lemma1_pass"] = lc->pass;
        }
        j["cells"].push_back(cell);
      }
    }
    if (lemma) j["lemma1_pass"] = lemma->pass;
    ctx.out << j.dump(2) << '\n';
  } else {
    std::ostringstream extra;
    extra << "# instance_hash=" << hex(instance_hash(inst)) << " policy=" << primary.name
          << " atoms=" << table.atoms << '\n'
          << "# primary_reward=" << num(table.primary_reward)
          << " benchmark_reward=" << num(table.benchmark_reward) << " lost=" << num(table.lost)
          << " coincidence_reward=" << num(table.coincidence_reward) << '\n';
    ctx.csv_header("oracle/1", extra.str());
    ctx.out << "resource,t,pr_bench_match,pr_lost,pr_coincide,pr_below,pr_f_not_fstar,"
               "lemma1_rhs,lemma1_margin,lemma1_pass\n";
    for (int i = 0; i < table.resources; ++i) {
      for (int t = 0; t < table.horizon; ++t) {
        const auto k = table.cell(i, t);
        ctx.out << i + 1 << ',' << t + 1 << ',' << num(table.bench_match_prob[k]) << ','
                << num(table.lost_prob[k]) << ',' << num(table.coincide_prob[k]) << ','
                << num(table.below_prob[k]) << ',' << num(table.f_not_fstar_prob[k]);
        if (lemma) {
          const auto* lc = lemma->find(i, t);
          ctx.out << ',' << num(lc->rhs) << ',' << num(lc->margin) << ',' << (lc->pass ? 1 : 0);
        } else {
          ctx.out << ",,,";
        }
        ctx.out << '\n';
      }
    }
  }
  if (table.claim1_violations || table.claim2_violations) {
    ctx.err << "coupling claim violated on an enumerated path\n";
    return kInvariant;
  }
  return kOk;
}

int cmd_verify(Context& ctx, const std::string& dir, const Common& c, int theorem,
               const std::string& policy_s) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const GuardLimits g = limits_from(c);
  const Policy policy = parse_policy(policy_s);
  const std::string label = "theorem" + std::to_string(theorem);

  std::vector<BoundReport> reports;
  for (const auto& f : files) {
    BoundReport r;
    r.id = f.filename().string();
    try {
      const Instance inst = load_valid(f.string());
      Bound b = theorem == 1 ? Bound::kTheorem1 : Bound::kTheorem2;
      if (theorem == 3) {
        b = inst.all_geometric() ? Bound::kTheorem3Geometric : Bound::kTheorem3General;
      }
      r = evaluate_bound(inst, policy, b, g, f.filename().string());
    } catch (const ParseError& e) {
      r.error = std::string("parse: ") + e.what();
    } catch (const ValidationFailure& e) {
      r.error = "validation: " + e.violations.front();
    }
    reports.push_back(std::move(r));
  }
  const auto passed = std::count_if(reports.begin(), reports.end(),
                                    [](const BoundReport& r) { return r.pass; });
  const std::string summary =
      std::to_string(passed) + "/" + std::to_string(reports.size()) + " pass " + label;

  if (c.format == "json") {
    json j = ctx.header();
    j["policy"] = policy.name;
    j["reports"] = json::array();
    for (const auto& r : reports) {
      json e = {{"id", r.id},         {"instance_hash", hex(r.hash)}, {"bound", to_string(r.bound)},
                {"p_min", r.p_min},   {"policy_value", r.policy_value}, {"opt", r.opt_value},
                {"ratio", r.ratio},   {"bound_value", r.bound_value},  {"margin", r.margin},
                {"pass", r.pass}};
      if (r.alpha) e["measured_alpha"] = *r.alpha;
      if (!r.error.empty()) e["error"] = r.error;
      j["reports"].push_back(e);
    }
    j["summary"] = summary;
    ctx.out << j.dump(2) << '\n';
  } else {
    ctx.csv_header("verify/1");
    ctx.out << "id,instance_hash,bound,p_min,policy_value,opt,ratio,bound_value,margin,pass,"
               "measured_alpha,error\n";
    for (const auto& r : reports) {
      ctx.out << r.id << ',' << hex(r.hash) << ',' << to_string(r.bound) << ',' << num(r.p_min)
              << ',' << num(r.policy_value) << ',' << num(r.opt_value) << ',' << num(r.ratio)
              << ',' << num(r.bound_value) << ',' << num(r.margin) << ',' << (r.pass ? 1 : 0)
              << ',' << (r.alpha ? num(*r.alpha) : "") << ",\"" << r.error << "\"\n";
    }
    ctx.out << "# " << summary << '\n';
  }
  ctx.err << summary << '\n';
  return passed == static_cast<long>(reports.size()) ? kOk : kInvariant;
}

int cmd_sweep(Context& ctx, const Common& c, const std::vector<double>& ps,
              const std::vector<double>& deltas) {
  for (double p : ps) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sweep p values must lie in (0, 1]");
  }
  for (double d : deltas) {
    if (!(d > 0.0)) throw ConfigError("sweep delta values must be > 0");
  }
  const auto rows = sweep_tight_example(ps, deltas);
  if (c.format == "json") {
    json j = ctx.header();
    j["rows"] = json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"p", r.p},
                           {"delta", r.delta},
                           {"opt", r.opt},
                           {"greedy", r.greedy},
                           {"ratio", r.ratio},
                           {"closed_form", r.closed_form},
                           {"difference", r.difference},
                           {"gap", r.gap}});
    }
    ctx.out << j.dump(2) << '\n';
  } else {
    ctx.csv_header("sweep/1");
    ctx.out << "p,delta,opt,greedy,ratio,closed_form,difference,gap\n";
    for (const auto& r : rows) {
      ctx.out << num(r.p) << ',' << num(r.delta) << ',' << num(r.opt) << ',' << num(r.greedy)
              << ',' << num(r.ratio) << ',' << num(r.closed_form) << ',' << num(r.difference)
              << ',' << num(r.gap) << '\n';
    }
  }
  return kOk;
}

int cmd_search(Context& ctx, const Common& c, const SearchParams& params, std::uint64_t seed,
               std::uint64_t budget) {
  const SearchResult res = ratio_search(params, seed, budget);
  if (c.format == "json") {
    json j = ctx.header();
    j["evaluations"] = res.evaluations;
    j["counterexample"] = res.counterexample;
    j["worst"] = json::array();
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
      const auto& r = res.reports[k];
      j["worst"].push_back({{"ratio", r.ratio},
                            {"bound", to_string(r.bound)},
                            {"bound_value", r.bound_value},
                            {"margin", r.margin},
                            {"pass", r.pass},
                            {"instance_hash", hex(r.hash)},
                            {"instance", json::parse(instance_to_json(res.instances[k]))}});
    }
    ctx.out << j.dump(2) << '\n';
  } else {
    ctx.csv_header("search/1", "# evaluations=" + std::to_string(res.evaluations) + "\n");
    ctx.out << "rank,instance_hash,ratio,bound,bound_value,margin,pass\n";
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
      const auto& r = res.reports[k];
      ctx.out << k + 1 << ',' << hex(r.hash) << ',' << num(r.ratio) << ',' << to_string(r.bound)
              << ',' << num(r.bound_value) << ',' << num(r.margin) << ',' << (r.pass ? 1 : 0)
              << '\n';
    }
  }
  if (res.counterexample) {
    ctx.err << "search found a ratio below the theorem bound\n";
    return kInvariant;
  }
  return kOk;
}

int cmd_generate(Context& ctx, const std::string& dir, const CorpusSpec& spec, int count,
                 std::uint64_t seed) {
  if (count < 1) throw ConfigError("--count must be >= 1");
  fs::create_directories(dir);
  const auto corpus = make_corpus(spec, count, seed);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "instance-%05zu.json", k);
    save_instance(corpus[k], fs::path(dir) / name);
  }
  ctx.out << "wrote " << corpus.size() << " instances to " << dir << '\n';
  return kOk;
}

DistributionFamily parse_family(const std::string& s) {
  static const std::map<std::string, DistributionFamily> kFamilies = {
      {"geometric", DistributionFamily::kGeometric},
      {"finite", DistributionFamily::kFinite},
      {"mixed", DistributionFamily::kMixed},
      {"nonreusable", DistributionFamily::kNonReusable},
      {"immediate", DistributionFamily::kImmediate}};
  return kFamilies.at(s);
}

}  // namespace

int report_failure(std::exception_ptr failure, std::ostream& err) {
  try {
    std::rethrow_exception(failure);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ValidationFailure& e) {
    for (const auto& v : e.violations) err << "violation: " << v << '\n';
    return kValidation;
  } catch (const GuardError& e) {
    err << "guard: " << e.what() << '\n';
    return kGuard;
  } catch (const InvariantViolation& e) {
    err << "internal invariant failure: " << e.what() << '\n';
    if (!e.dump().empty()) err << e.dump();
    return kInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online matching with reusable resources: exact values, couplings, bound checks",
               "reuse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::string path;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* validate_cmd = app.add_subcommand("validate", "parse and validate an instance file");
  validate_cmd->add_option("file", path, "instance JSON")->required();

  auto* solve_cmd = app.add_subcommand("solve", "exact OPT and Greedy values with bound margins");
  solve_cmd->add_option("file", path, "instance JSON")->required();
  add_common(solve_cmd, common, true);

  std::string scheme = "stack";
  int runs = 1;
  std::string policy = "greedy";
  auto* couple_cmd = app.add_subcommand("couple", "coupled simulation against the DP optimum");
  couple_cmd->add_option("file", path, "instance JSON")->required();
  couple_cmd->add_option("--coupling", scheme, "stack or bernoulli")
      ->check(CLI::IsMember({"stack", "bernoulli"}))
      ->capture_default_str();
  couple_cmd->add_option("--runs", runs, "1 emits a JSONL trace, >= 2 emits estimates")
      ->capture_default_str();
  couple_cmd->add_option("--policy", policy, "greedy or alpha:<a>")->capture_default_str();
  auto* couple_seed = couple_cmd->add_option("--seed", seed, "seed (default $REUSE_SEED or 0)");
  add_common(couple_cmd, common, true);

  std::string oracle_scheme;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact coupled event table by enumeration");
  oracle_cmd->add_option("file", path, "instance JSON")->required();
  oracle_cmd->add_option("--coupling", oracle_scheme, "bernoulli (geometric) or stack (finite)")
      ->check(CLI::IsMember({"stack", "bernoulli"}));
  oracle_cmd->add_option("--policy", policy, "greedy or alpha:<a>")->capture_default_str();
  add_common(oracle_cmd, common, true);

  int theorem = 2;
  auto* verify_cmd = app.add_subcommand("verify", "check a bound on every instance in a directory");
  verify_cmd->add_option("dir", path, "directory of instance JSON files")->required();
  verify_cmd->add_option("--theorem", theorem, "1, 2 or 3")
      ->check(CLI::IsMember({1, 2, 3}))
      ->capture_default_str();
  verify_cmd->add_option("--policy", policy, "greedy or alpha:<a>")->capture_default_str();
  add_common(verify_cmd, common, true);

  std::vector<double> ps = {0.1, 0.3, 0.5, 0.9};
  std::vector<double> deltas = {0.1, 0.01, 0.001};
  auto* sweep_cmd = app.add_subcommand("sweep", "exact ratio on the tight two-step example");
  sweep_cmd->add_option("--p", ps, "comma-separated p grid")->delimiter(',');
  sweep_cmd->add_option("--delta", deltas, "comma-separated delta grid")->delimiter(',');
  add_common(sweep_cmd, common, false);

  SearchParams search;
  std::string search_family = "geometric";
  std::uint64_t budget = 1000;
  auto* search_cmd = app.add_subcommand("search", "hill-climb for low Greedy/OPT instances");
  search_cmd->add_option("--family", search_family, "geometric or nonreusable")
      ->check(CLI::IsMember({"geometric", "nonreusable"}))
      ->capture_default_str();
  search_cmd->add_option("--p-min", search.p_min, "fixed p_min (geometric)")->capture_default_str();
  search_cmd->add_option("--resources", search.n_resources)->capture_default_str();
  search_cmd->add_option("--horizon", search.horizon)->capture_default_str();
  search_cmd->add_option("--population", search.population)->capture_default_str();
  search_cmd->add_option("--keep", search.keep)->capture_default_str();
  search_cmd->add_option("--budget", budget)->capture_default_str();
  auto* search_seed = search_cmd->add_option("--seed", seed, "seed (default $REUSE_SEED or 0)");
  add_common(search_cmd, common, false);

  CorpusSpec spec;
  std::string gen_family = "geometric";
  int count = 100;
  auto* gen_cmd = app.add_subcommand("generate", "write a seeded random corpus of instance files");
  gen_cmd->add_option("dir", path, "output directory")->required();
  gen_cmd->add_option("--count", count)->capture_default_str();
  gen_cmd->add_option("--family", gen_family)
      ->check(CLI::IsMember({"geometric", "finite", "mixed", "nonreusable", "immediate"}))
      ->capture_default_str();
  gen_cmd->add_option("--max-resources", spec.max_resources)->capture_default_str();
  gen_cmd->add_option("--max-horizon", spec.max_horizon)->capture_default_str();
  gen_cmd->add_option("--max-cells", spec.max_cells, "cap on N*T, 0 for none")->capture_default_str();
  gen_cmd->add_option("--max-duration", spec.max_duration)->capture_default_str();
  auto* gen_seed = gen_cmd->add_option("--seed", seed, "seed (default $REUSE_SEED or 0)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  auto* sub = app.get_subcommands().front();
  Context ctx{out, err, sub->get_name()};
  try {
    if (!(couple_seed->count() || search_seed->count() || gen_seed->count())) {
      seed = default_seed();
    } else {
      seed_given = true;
    }
    echo_common(ctx, common);
    if (sub == validate_cmd) return cmd_validate(ctx, path);
    if (sub == solve_cmd) {
      ctx.config["file"] = fs::path(path).filename().string();
      return cmd_solve(ctx, path, common);
    }
    if (sub == couple_cmd) {
      ctx.config.update({{"file", fs::path(path).filename().string()},
                         {"coupling", scheme},
                         {"runs", runs},
                         {"policy", policy},
                         {"seed", seed},
                         {"seed_source", seed_given ? "flag" : "default"}});
      return cmd_couple(ctx, path, common, scheme, runs, seed, policy);
    }
    if (sub == oracle_cmd) {
      ctx.config.update({{"file", fs::path(path).filename().string()}, {"policy", policy}});
      return cmd_oracle(ctx, path, common, oracle_scheme, policy);
    }
    if (sub == verify_cmd) {
      ctx.config.update({{"dir", path}, {"theorem", theorem}, {"policy", policy}});
      return cmd_verify(ctx, path, common, theorem, policy);
    }
    if (sub == sweep_cmd) {
      ctx.config.update({{"p", ps}, {"delta", deltas}});
      return cmd_sweep(ctx, common, ps, deltas);
    }
    if (sub == search_cmd) {
      search.family = parse_family(search_family);
      if (search.family == DistributionFamily::kNonReusable) search.p_min = 0.0;
      ctx.config.update({{"family", search_family},
                         {"p_min", search.p_min},
                         {"resources", search.n_resources},
                         {"horizon", search.horizon},
                         {"population", search.population},
                         {"keep", search.keep},
                         {"budget", budget},
                         {"seed", seed}});
      return cmd_search(ctx, common, search, seed, budget);
    }
    if (sub == gen_cmd) {
      spec.family = parse_family(gen_family);
      return cmd_generate(ctx, path, spec, count, seed);
    }
  } catch (...) {
    return report_failure(std::current_exception(), err);
  }
  return kValidation;
}

}  // namespace reuse::cli
