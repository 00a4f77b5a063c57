#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "bsmmr/analysis.hpp"
#include "bsmmr/egocv.hpp"
#include "bsmmr/rjmcmc.hpp"
#include "bsmmr/selftest.hpp"

namespace bsmmr::cli {

namespace fs = std::filesystem;

RunConfig preset_config(const Scenario& scenario, Scale scale, std::uint64_t seed) {
  RunConfig c;
  const int k = scenario.graph.region_count();
  for (int r = 0; r < k; ++r)
    c.regions.push_back({scenario.graph.boxes[r], "region" + std::to_string(r + 1) + ".csv"});
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (scenario.graph.weights(a, b) > 0.0) c.edges.emplace_back(a, b);
  c.domain_mode = scenario.graph.domain_mode;
  c.prior = scenario.prior;
  if (scenario.binomial) c.likelihood.family = BinomialFamily{};
  // Two-region Gaussian studies and the binomial networks estimate the
  // baselines under a CAR prior; the p/q studies and single regions fix them at 0.
  const bool car = k > 1 && (scenario.binomial || scenario.name.rfind("study", 0) == 0);
  if (car) c.likelihood.baseline = CarBaseline{};
  else c.likelihood.baseline = FixedBaseline{Eigen::VectorXd::Zero(k)};
  if (scale == Scale::Paper) {
    c.schedule = {3000000, 500000, 1000, {}, 1};
    c.cv.fold_schedule = {50000, 25000, 100, {}, 1};
  } else {
    c.schedule = {120000, 20000, 40, {}, 1};
    c.cv.fold_schedule = {2000, 1000, 4, {}, 1};
  }
  c.output_dir = ".";
  c.seed = seed;
  return c;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = -1;
  int verbosity = -1;
};

struct Loaded {
  RunConfig config;
  fs::path base;
  fs::path out;
};

Loaded load(const Common& o, CLI::App* cmd) {
  if (o.config.empty()) throw UsageError("--config is required");
  Loaded l;
  l.config = read_config(o.config);
  l.base = fs::path(o.config).parent_path();
  if (cmd->count("--seed")) l.config.seed = o.seed;
  if (o.threads >= 0) l.config.cv.threads = o.threads;
  if (o.verbosity >= 0) l.config.verbosity = o.verbosity;
  l.out = o.out.empty() ? l.base / l.config.output_dir : fs::path(o.out);
  return l;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string acceptance_table(const MoveCounters& c) {
  std::ostringstream os;
  os << "move    proposed  accepted  instant-rejected  rate\n";
  for (MoveKind kind : {MoveKind::Birth, MoveKind::Death, MoveKind::Shift}) {
    const auto i = static_cast<std::size_t>(kind);
    os << std::left << std::setw(8) << to_string(kind) << std::right << std::setw(8) << c.proposed[i]
       << std::setw(10) << c.accepted[i] << std::setw(18) << c.instant_rejected[i] << "  "
       << fixed(c.acceptance_rate(kind), 4) << '\n';
  }
  return os.str();
}

Json acceptance_json(const MoveCounters& c) {
  Json j = Json::object();
  for (MoveKind kind : {MoveKind::Birth, MoveKind::Death, MoveKind::Shift}) {
    const auto i = static_cast<std::size_t>(kind);
    j[std::string(to_string(kind))] = {{"proposed", c.proposed[i]},
                                       {"accepted", c.accepted[i]},
                                       {"instant_rejected", c.instant_rejected[i]},
                                       {"rate", c.acceptance_rate(kind)}};
  }
  return j;
}

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const std::string& preset, const std::string& scale_name, std::uint64_t seed, std::string out,
                 std::ostream& os) {
  Scale scale = Scale::Desk;
  if (scale_name == "paper") scale = Scale::Paper;
  else if (scale_name != "desk") throw UsageError("--scale must be desk or paper");
  Scenario scenario;
  try {
    scenario = make_scenario(preset);
  } catch (const Error&) {
    std::string names;
    for (const auto& n : scenario_names()) names += " " + n;
    throw UsageError("unknown preset '" + preset + "'; available:" + names);
  }
  if (out.empty()) out = preset;
  const fs::path dir(out);
  const auto data = scenario.generate(Rng::derive(seed, {kSimulateStream}));
  Json truth = {{"preset", preset}, {"seed", seed}, {"regions", Json::array()}};
  for (std::size_t k = 0; k < data.size(); ++k) {
    write_region_csv(dir / ("region" + std::to_string(k + 1) + ".csv"), data[k]);
    const auto& d = scenario.regions[k];
    truth["regions"].push_back({{"box", box_to_json(d.box)}, {"alpha", d.alpha}, {"truth", truth_to_json(d.truth)}});
  }
  write_text(dir / "truth.json", dump(truth));
  write_text(dir / "config.json", dump(config_to_json(preset_config(scenario, scale, seed))));
  os << "wrote " << data.size() << " region files, truth.json and config.json to " << dir.string() << '\n';
  return 0;
}

// ---- tune -------------------------------------------------------------------

int cmd_tune(const Common& o, CLI::App* cmd, std::ostream& os) {
  auto l = load(o, cmd);
  Problem problem = load_problem(l.config, l.base);
  CvConfig cv = l.config.cv;
  cv.seed = Rng::derive(l.config.seed, {kTuneStream});
  const auto result = ego_cv(problem, cv);
  Json evals = Json::array();
  for (const auto& e : result.log)
    evals.push_back({{"eval", e.index},
                     {"omega", e.omega},
                     {"cv_mean", e.mean},
                     {"cv_variance", e.variance},
                     {"phase", e.phase == EvalPhase::Zero ? "zero" : e.phase == EvalPhase::Bound ? "bound" : "ei"}});
  const Json summary = {{"omega_opt", result.omega_opt},
                        {"evals", static_cast<int>(result.log.size())},
                        {"bound_evals", result.bound_evals},
                        {"notes", result.notes},
                        {"log", evals}};
  write_text(l.out / "tune.json", dump(summary));
  write_text(l.out / "eval_log.csv", eval_log_csv(result));
  write_text(l.out / "tune_config.json", dump(config_to_json(l.config)));
  os << Json{{"omega_opt", result.omega_opt}, {"evals", static_cast<int>(result.log.size())}}.dump() << '\n';
  return 0;
}

// ---- fit --------------------------------------------------------------------

struct FitOptions {
  std::optional<double> omega;
  std::string tuned;
  std::string resume;
  std::int64_t max_sweeps = -1;
  std::int64_t checkpoint_every = 0;
};

int cmd_fit(const Common& o, const FitOptions& f, CLI::App* cmd, std::ostream& os, std::ostream& es) {
  auto l = load(o, cmd);
  if (f.omega && !f.tuned.empty()) throw UsageError("--omega and --tuned are exclusive");
  if (f.omega) l.config.prior.omega = *f.omega;
  if (!f.tuned.empty()) l.config.prior.omega = read_json(f.tuned).at("omega_opt").get<double>();
  Problem problem = load_problem(l.config, l.base);
  SamplerSchedule schedule = l.config.schedule;
  schedule.seed = Rng::derive(l.config.seed, {kFitStream});
  schedule.trace_points =
      random_trace_points(problem.graph, l.config.trace_points, Rng::derive(l.config.seed, {kTraceStream}));

  std::optional<Sampler> sampler;
  if (f.resume.empty()) sampler.emplace(problem, schedule);
  else sampler.emplace(problem, schedule, checkpoint_from_json(read_json(f.resume)));

  const std::int64_t stop = f.max_sweeps >= 0 ? std::min(schedule.iterations, sampler->sweep() + f.max_sweeps)
                                              : schedule.iterations;
  const std::int64_t every = f.checkpoint_every > 0 ? f.checkpoint_every : std::max<std::int64_t>(1, schedule.iterations / 10);
  while (sampler->sweep() < stop) {
    sampler->advance(std::min(every, stop - sampler->sweep()));
    write_text(l.out / "checkpoint.json", checkpoint_to_json(sampler->checkpoint()).dump());
    if (l.config.verbosity >= 2) es << "sweep " << sampler->sweep() << " / " << schedule.iterations << '\n';
  }
  write_text(l.out / "fit_config.json", dump(config_to_json(l.config)));
  if (!sampler->done()) {
    os << "stopped at sweep " << sampler->sweep() << "; resume with --resume " << (l.out / "checkpoint.json").string()
       << '\n';
    return 0;
  }
  const Chain& chain = sampler->chain();
  write_text(l.out / "chain.json", chain_to_json(chain, false).dump());
  write_text(l.out / "trace.csv", trace_csv(chain));
  const Json summary = {{"omega", l.config.prior.omega},
                        {"sweeps", chain.sweeps},
                        {"samples", chain.samples.size()},
                        {"alpha_accepted", chain.alpha_accepted},
                        {"acceptance", acceptance_json(chain.counters)}};
  write_text(l.out / "fit.json", dump(summary));
  os << "omega " << l.config.prior.omega << ", " << chain.sweeps << " sweeps, " << chain.samples.size()
     << " stored samples\n"
     << acceptance_table(chain.counters);
  return 0;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeOptions {
  std::vector<std::string> chains;
  std::vector<std::string> labels;
  std::string truth;
  int resolution = 100;
  std::string out = "analysis";
  double relevance_threshold = 0.9;
  ThresholdOptions thresholds;
};

Json threshold_json(const ThresholdReport& r) {
  Json clusters = Json::array();
  for (const auto& c : r.clusters)
    clusters.push_back({{"location", std::vector<double>(c.location.data(), c.location.data() + c.location.size())},
                        {"level", c.level},
                        {"jump", c.jump},
                        {"occurrence", c.occurrence},
                        {"members", c.members}});
  return {{"region", r.region + 1},
          {"location_tol", r.location_tol},
          {"level_tol", r.level_tol},
          {"min_jump", r.min_jump},
          {"clusters", clusters}};
}

Json relevance_json(const RelevanceReport& r) {
  Json subsets = Json::array();
  for (const auto& [s, p] : r.empty_probability) {
    std::vector<int> axes;
    for (int d = 0; d < r.axis_redundancy.size(); ++d)
      if (axis_active(s, d)) axes.push_back(d + 1);
    subsets.push_back({{"subset", axes}, {"empty_probability", p}});
  }
  return {{"region", r.region + 1},
          {"subsets", subsets},
          {"axis_redundancy",
           std::vector<double>(r.axis_redundancy.data(), r.axis_redundancy.data() + r.axis_redundancy.size())},
          {"redundant", r.redundant},
          {"threshold", r.threshold}};
}

int cmd_analyze(const AnalyzeOptions& a, std::ostream& os) {
  if (a.chains.empty()) throw UsageError("at least one --chain is required");
  if (!a.labels.empty() && a.labels.size() != a.chains.size())
    throw UsageError("give one --label per --chain");
  if (a.resolution < 1) throw UsageError("--resolution must be positive");
  const fs::path out(a.out);
  std::optional<Json> truth;
  std::vector<TrueFunction> truths;
  if (!a.truth.empty()) {
    truth = read_json(a.truth);
    for (const auto& r : truth->at("regions")) truths.push_back(truth_from_json(r.at("truth")));
  }
  std::vector<std::string> labels = a.labels;
  if (labels.empty())
    for (std::size_t i = 0; i < a.chains.size(); ++i)
      labels.push_back(a.chains.size() == 1 ? "fit" : "chain" + std::to_string(i + 1));

  std::vector<std::vector<ErrorSummary>> errors;  // [chain][region]
  int regions = 0;
  for (std::size_t i = 0; i < a.chains.size(); ++i) {
    const Chain chain = chain_from_json(read_json(a.chains[i]));
    if (chain.samples.empty()) throw Error(ErrorCode::EmptyChain, a.chains[i] + " holds no samples");
    regions = static_cast<int>(chain.samples.front().surfaces.size());
    if (truth && static_cast<int>(truths.size()) != regions)
      throw Error(ErrorCode::Config, "truth manifest and chain disagree on the region count");
    const std::string prefix = a.chains.size() == 1 ? "" : labels[i] + "_";
    Json thresholds = Json::array(), relevance = Json::array();
    errors.emplace_back();
    for (int k = 0; k < regions; ++k) {
      const int m = chain.samples.front().surfaces[k].dim();
      const Eigen::VectorXi res = Eigen::VectorXi::Constant(m, a.resolution);
      const CovariateBox box =
          truth ? box_from_json(truth->at("regions")[k].at("box")) : chain.samples.front().surfaces[k].box();
      const auto grid = grid_summary(chain, k, box, res);
      write_text(out / (prefix + "grid_region" + std::to_string(k + 1) + ".csv"), grid_csv(grid));
      thresholds.push_back(threshold_json(detect_thresholds(chain, k, a.thresholds)));
      relevance.push_back(relevance_json(variable_relevance(chain, k, a.relevance_threshold)));
      if (truth) {
        const double alpha = truth->at("regions")[k].value("alpha", 0.0);
        const auto& f = truths[k];
        errors.back().push_back(mae_sd(grid, [&](const Eigen::VectorXd& x) { return alpha + f(x); }));
      }
    }
    write_text(out / (prefix + "thresholds.json"), dump(thresholds));
    write_text(out / (prefix + "relevance.json"), dump(relevance));
  }
  if (truth) {
    std::ostringstream csv, table;
    csv << "region";
    table << "Mean absolute errors x1e-2 (standard deviation x1e-2)\n" << std::left << std::setw(10) << "region";
    for (const auto& lab : labels) {
      csv << ',' << lab << "_mae," << lab << "_sd";
      table << std::setw(18) << lab;
    }
    csv << '\n';
    table << '\n';
    std::vector<double> mean_mae(labels.size(), 0.0);
    for (int k = 0; k < regions; ++k) {
      csv << k + 1;
      table << std::setw(10) << k + 1;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& e = errors[i][k];
        csv.precision(17);
        csv << ',' << e.mae << ',' << e.sd;
        table << std::setw(18) << (fixed(100 * e.mae, 2) + " (" + fixed(100 * e.sd, 2) + ")");
        mean_mae[i] += e.mae / regions;
      }
      csv << '\n';
      table << '\n';
    }
    table << std::setw(10) << "average";
    for (double v : mean_mae) table << std::setw(18) << fixed(100 * v, 2);
    table << '\n';
    write_text(out / "mae.csv", csv.str());
    os << table.str();
  }
  os << "wrote analysis for " << a.chains.size() << " chain(s) to " << out.string() << '\n';
  return 0;
}

// ---- selftest ---------------------------------------------------------------

int cmd_selftest(std::uint64_t seed, bool full, std::ostream& os) {
  const auto rep = run_selftest(seed, full);
  for (const auto& c : rep.checks) {
    os << "criterion " << c.criterion << ": " << (c.passed ? "PASS" : "FAIL") << "  " << c.detail << '\n';
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(rep.digest));
  os << "digest " << hex << '\n';
  return rep.passed() ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial monotone multiple regression by reversible-jump MCMC"};
  app.name("bsmmr");
  app.require_subcommand(1);

  std::string preset, scale = "desk", sim_out;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Generate a preset dataset, its truth manifest and a config");
  sim->add_option("--preset", preset, "Preset name")->required();
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--scale", scale, "Sampler budgets: desk or paper");
  sim->add_option("--out", sim_out, "Output directory (default: the preset name)");
  int sim_threads = 0;
  sim->add_option("--threads", sim_threads, "Ignored; generation is serial");

  Common tune_o;
  auto* tune = app.add_subcommand("tune", "Choose omega by cross-validated Bayesian optimisation");
  auto add_common = [](CLI::App* c, Common& o) {
    c->add_option("--config", o.config, "Run config JSON")->required();
    c->add_option("--out", o.out, "Output directory (default: output_dir of the config)");
    c->add_option("--seed", o.seed, "Master seed (overrides the config)");
    c->add_option("--threads", o.threads, "Worker cap, 0 for all cores");
    c->add_option("--verbosity", o.verbosity, "0 quiet, 1 summaries, 2 progress");
  };
  add_common(tune, tune_o);

  Common fit_o;
  FitOptions fit_f;
  auto* fit = app.add_subcommand("fit", "Run the sampler and store the chain");
  add_common(fit, fit_o);
  fit->add_option("--omega", fit_f.omega, "Smoothing parameter (overrides the config)");
  fit->add_option("--tuned", fit_f.tuned, "tune.json whose omega_opt to use");
  fit->add_option("--resume", fit_f.resume, "Continue from a checkpoint");
  fit->add_option("--max-sweeps", fit_f.max_sweeps, "Stop after this many sweeps in this invocation");
  fit->add_option("--checkpoint-every", fit_f.checkpoint_every, "Sweeps between checkpoints");

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Grid summaries, threshold and relevance reports, MAE tables");
  analyze->add_option("--chain", an.chains, "chain.json (repeatable, one table column each)")->required();
  analyze->add_option("--label", an.labels, "Column label per chain");
  analyze->add_option("--truth", an.truth, "truth.json from simulate");
  analyze->add_option("--resolution", an.resolution, "Grid cells per axis");
  analyze->add_option("--relevance-threshold", an.relevance_threshold, "Redundancy probability cut-off");
  analyze->add_option("--location-tol", an.thresholds.location_tol, "Threshold clustering: max-norm location tolerance");
  analyze->add_option("--level-tol", an.thresholds.level_tol, "Threshold clustering: level tolerance");
  analyze->add_option("--min-jump", an.thresholds.min_jump, "Smallest jump counted as a threshold");
  analyze->add_option("--out", an.out, "Output directory");
  int an_threads = 0;
  analyze->add_option("--threads", an_threads, "Ignored; analysis is serial");

  std::uint64_t st_seed = 1;
  bool st_full = false;
  auto* selftest = app.add_subcommand("selftest", "Replay the monotonicity, discrepancy and move-algebra checks");
  selftest->add_option("--seed", st_seed, "Seed");
  selftest->add_flag("--full", st_full, "Full-size checks");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(preset, scale, sim_seed, sim_out, out);
    if (*tune) return cmd_tune(tune_o, tune, out);
    if (*fit) return cmd_fit(fit_o, fit_f, fit, out, err);
    if (*analyze) return cmd_analyze(an, out);
    if (*selftest) return cmd_selftest(st_seed, st_full, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid input:\n";
    for (const auto& issue : e.issues()) err << "  " << to_string(issue.code) << ": " << issue.message << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bsmmr::cli
