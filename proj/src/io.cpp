#include "bsmmr/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace bsmmr {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Config, where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(ErrorCode::Config, "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::VectorXd to_vec(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json from_vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json from_mat(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(from_vec(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd to_mat(const Json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m.cols()) throw Error(ErrorCode::Config, "ragged matrix");
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return m;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto t = trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) throw Error(ErrorCode::Io, where + ": bad number '" + t + "'");
  return v;
}

}  // namespace

std::string region_csv(const RegionData& data) {
  std::ostringstream os;
  const auto m = data.x.cols();
  for (Eigen::Index d = 0; d < m; ++d) os << 'x' << d + 1 << ',';
  os << 'y';
  if (data.trials) os << ",trials";
  os << '\n';
  for (Eigen::Index t = 0; t < data.size(); ++t) {
    for (Eigen::Index d = 0; d < m; ++d) os << fmt(data.x(t, d)) << ',';
    os << fmt(data.y(t));
    if (data.trials) os << ',' << (*data.trials)(t);
    os << '\n';
  }
  return os.str();
}

RegionData parse_region_csv(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, origin + ": empty file");
  const auto header = split(trim(line), ',');
  int m = 0;
  while (m < static_cast<int>(header.size()) && trim(header[m]) == "x" + std::to_string(m + 1)) ++m;
  if (m < 1 || m >= static_cast<int>(header.size()) || trim(header[m]) != "y")
    throw Error(ErrorCode::Io, origin + ": header must be x1,...,xm,y[,trials]");
  const bool has_trials = static_cast<int>(header.size()) == m + 2;
  if (has_trials && trim(header[m + 1]) != "trials") throw Error(ErrorCode::Io, origin + ": unexpected column");
  if (static_cast<int>(header.size()) > m + 2) throw Error(ErrorCode::Io, origin + ": too many columns");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != header.size())
      throw Error(ErrorCode::Io, origin + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, origin + ":" + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  RegionData data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.x.resize(n, m);
  data.y.resize(n);
  if (has_trials) data.trials = Eigen::VectorXi(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int d = 0; d < m; ++d) data.x(t, d) = rows[t][d];
    data.y(t) = rows[t][m];
    if (has_trials) {
      const double a = rows[t][m + 1];
      if (a != std::floor(a)) throw Error(ErrorCode::Io, origin + ": trials must be integers");
      (*data.trials)(t) = static_cast<int>(a);
    }
  }
  return data;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

void write_region_csv(const std::filesystem::path& path, const RegionData& data) { write_text(path, region_csv(data)); }

RegionData read_region_csv(const std::filesystem::path& path) { return parse_region_csv(read_text(path), path.string()); }

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
}

Json box_to_json(const CovariateBox& box) { return {{"lower", from_vec(box.lower)}, {"upper", from_vec(box.upper)}}; }

CovariateBox box_from_json(const Json& j) {
  check_keys(j, {"lower", "upper"}, "box");
  return {to_vec(j.at("lower")), to_vec(j.at("upper"))};
}

Json surface_to_json(const MonotoneSurface& s) {
  Json points = Json::array();
  s.for_each_point([&](SubsetMask mask, const SupportPoint& pt) {
    std::vector<int> axes;
    for (int d = 0; d < s.dim(); ++d)
      if (axis_active(mask, d)) axes.push_back(d + 1);
    points.push_back({{"subset", axes}, {"location", from_vec(pt.location)}, {"level", pt.level}});
  });
  return {{"box", box_to_json(s.box())},
          {"delta_min", s.delta_min()},
          {"delta_max", s.delta_max()},
          {"n_max", s.n_max()},
          {"points", points}};
}

MonotoneSurface surface_from_json(const Json& j) {
  check_keys(j, {"box", "delta_min", "delta_max", "n_max", "points"}, "surface");
  MonotoneSurface s(box_from_json(j.at("box")), j.at("delta_min").get<double>(), j.at("delta_max").get<double>(),
                    j.at("n_max").get<int>());
  for (const auto& p : j.at("points")) {
    check_keys(p, {"subset", "location", "level"}, "surface point");
    SupportPoint pt{to_vec(p.at("location")), p.at("level").get<double>()};
    SubsetMask declared = 0;
    for (int axis : p.at("subset").get<std::vector<int>>()) {
      if (axis < 1 || axis > s.dim()) throw Error(ErrorCode::Config, "subset axis out of range");
      declared |= 1u << (axis - 1);
    }
    if (pt.location.size() != s.dim() || s.subset_of(pt.location) != declared)
      throw Error(ErrorCode::MonotoneViolation, "point location does not match its subset");
    s = apply_birth(s, std::move(pt));
  }
  return s;
}

Json nuisance_to_json(const NuisanceState& n) {
  return {{"alpha", from_vec(n.alpha)}, {"sigma2", from_vec(n.sigma2)}, {"tau", n.tau}};
}

NuisanceState nuisance_from_json(const Json& j) {
  check_keys(j, {"alpha", "sigma2", "tau"}, "nuisance");
  return {to_vec(j.at("alpha")), to_vec(j.at("sigma2")), j.at("tau").get<double>()};
}

Json chain_to_json(const Chain& chain, bool with_traces) {
  Json samples = Json::array();
  for (const auto& s : chain.samples) {
    Json surfaces = Json::array();
    for (const auto& surf : s.surfaces) surfaces.push_back(surface_to_json(surf));
    samples.push_back({{"surfaces", surfaces}, {"nuisance", nuisance_to_json(s.nuisance)}});
  }
  const auto& c = chain.counters;
  Json out = {{"sweeps", chain.sweeps},
              {"alpha_accepted", chain.alpha_accepted},
              {"counters",
               {{"proposed", c.proposed}, {"accepted", c.accepted}, {"instant_rejected", c.instant_rejected}}},
              {"samples", samples}};
  Json traces = Json::array();
  if (with_traces) {
    for (const auto& t : chain.traces)
      traces.push_back({{"region", t.region}, {"point", t.point}, {"location", from_vec(t.location)}, {"values", t.values}});
  }
  out["traces"] = traces;
  return out;
}

Chain chain_from_json(const Json& j) {
  check_keys(j, {"sweeps", "alpha_accepted", "counters", "samples", "traces"}, "chain");
  Chain chain;
  chain.sweeps = j.at("sweeps").get<std::int64_t>();
  chain.alpha_accepted = j.value("alpha_accepted", std::int64_t{0});
  const auto& c = j.at("counters");
  check_keys(c, {"proposed", "accepted", "instant_rejected"}, "counters");
  chain.counters.proposed = c.at("proposed").get<std::array<std::int64_t, 3>>();
  chain.counters.accepted = c.at("accepted").get<std::array<std::int64_t, 3>>();
  chain.counters.instant_rejected = c.at("instant_rejected").get<std::array<std::int64_t, 3>>();
  for (const auto& s : j.at("samples")) {
    check_keys(s, {"surfaces", "nuisance"}, "sample");
    Sample sample;
    for (const auto& surf : s.at("surfaces")) sample.surfaces.push_back(surface_from_json(surf));
    sample.nuisance = nuisance_from_json(s.at("nuisance"));
    chain.samples.push_back(std::move(sample));
  }
  if (j.contains("traces")) {
    for (const auto& t : j.at("traces")) {
      check_keys(t, {"region", "point", "location", "values"}, "trace");
      TraceSeries series;
      series.region = t.at("region").get<int>();
      series.point = t.at("point").get<int>();
      series.location = to_vec(t.at("location"));
      series.values = t.at("values").get<std::vector<double>>();
      chain.traces.push_back(std::move(series));
    }
  }
  return chain;
}

Json checkpoint_to_json(const SamplerCheckpoint& c) {
  Json surfaces = Json::array();
  for (const auto& s : c.surfaces) surfaces.push_back(surface_to_json(s));
  return {{"surfaces", surfaces},
          {"nuisance", nuisance_to_json(c.nuisance)},
          {"rng", c.rng_state},
          {"sweep", c.sweep},
          {"chain", chain_to_json(c.chain)}};
}

SamplerCheckpoint checkpoint_from_json(const Json& j) {
  try {
    check_keys(j, {"surfaces", "nuisance", "rng", "sweep", "chain"}, "checkpoint");
    SamplerCheckpoint c;
    for (const auto& s : j.at("surfaces")) c.surfaces.push_back(surface_from_json(s));
    c.nuisance = nuisance_from_json(j.at("nuisance"));
    c.rng_state = j.at("rng").get<std::string>();
    c.sweep = j.at("sweep").get<std::int64_t>();
    c.chain = chain_from_json(j.at("chain"));
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed checkpoint: ") + e.what());
  }
}

Json truth_to_json(const TrueFunction& f) {
  using K = TrueFunction::Kind;
  switch (f.kind()) {
    case K::Constant: return {{"kind", "constant"}, {"base", f.base()}};
    case K::Staircase: {
      Json corners = Json::array();
      for (const auto& c : f.corners()) corners.push_back(from_vec(c));
      return {{"kind", "staircase"}, {"base", f.base()}, {"corners", corners}, {"jumps", f.jumps()}};
    }
    case K::Product:
      return {{"kind", "product"}, {"box", box_to_json(f.box())}, {"scale", f.scale()}, {"base", f.base()}};
    case K::Additive:
      return {{"kind", "additive"},
              {"box", box_to_json(f.box())},
              {"weights", from_vec(f.weights())},
              {"powers", from_vec(f.powers())},
              {"base", f.base()}};
    case K::Mixture: {
      Json parts = Json::array();
      for (const auto& p : f.parts()) parts.push_back(truth_to_json(p));
      return {{"kind", "mixture"}, {"parts", parts}};
    }
    case K::Surface: return {{"kind", "surface"}, {"surface", surface_to_json(*f.fixed_surface())}};
  }
  return {};
}

TrueFunction truth_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    check_keys(j, {"kind", "base"}, "truth");
    return TrueFunction::constant(j.at("base").get<double>());
  }
  if (kind == "staircase") {
    check_keys(j, {"kind", "base", "corners", "jumps"}, "truth");
    std::vector<Eigen::VectorXd> corners;
    for (const auto& c : j.at("corners")) corners.push_back(to_vec(c));
    return TrueFunction::staircase(j.at("base").get<double>(), std::move(corners),
                                   j.at("jumps").get<std::vector<double>>());
  }
  if (kind == "product") {
    check_keys(j, {"kind", "box", "scale", "base"}, "truth");
    return TrueFunction::product(box_from_json(j.at("box")), j.at("scale").get<double>(), j.at("base").get<double>());
  }
  if (kind == "additive") {
    check_keys(j, {"kind", "box", "weights", "powers", "base"}, "truth");
    return TrueFunction::additive(box_from_json(j.at("box")), to_vec(j.at("weights")), to_vec(j.at("powers")),
                                  j.at("base").get<double>());
  }
  if (kind == "mixture") {
    check_keys(j, {"kind", "parts"}, "truth");
    std::vector<TrueFunction> parts;
    for (const auto& p : j.at("parts")) parts.push_back(truth_from_json(p));
    return TrueFunction::mixture(std::move(parts));
  }
  if (kind == "surface") {
    check_keys(j, {"kind", "surface"}, "truth");
    return TrueFunction::surface(surface_from_json(j.at("surface")));
  }
  throw Error(ErrorCode::Config, "unknown truth kind '" + kind + "'");
}

std::string trace_csv(const Chain& chain) {
  std::ostringstream os;
  os << "sweep,region,point,level\n";
  std::size_t len = 0;
  for (const auto& t : chain.traces) len = std::max(len, t.values.size());
  for (std::size_t s = 0; s < len; ++s)
    for (const auto& t : chain.traces)
      if (s < t.values.size()) os << s + 1 << ',' << t.region + 1 << ',' << t.point + 1 << ',' << fmt(t.values[s]) << '\n';
  return os.str();
}

namespace {

const char* transform_name(OmegaTransform t) {
  switch (t) {
    case OmegaTransform::SqrtOver50: return "sqrt_over_50";
    case OmegaTransform::Log: return "log";
    case OmegaTransform::Identity: return "identity";
  }
  return "?";
}

OmegaTransform transform_from(const std::string& s) {
  if (s == "sqrt_over_50") return OmegaTransform::SqrtOver50;
  if (s == "log") return OmegaTransform::Log;
  if (s == "identity") return OmegaTransform::Identity;
  throw Error(ErrorCode::Config, "unknown transform '" + s + "'");
}

Json prior_to_json(const PriorConfig& p) {
  return {{"omega", p.omega},
          {"eta", p.eta},
          {"p", p.p},
          {"q", p.q},
          {"delta_min", p.delta_min},
          {"delta_max", p.delta_max},
          {"n_max", p.n_max},
          {"moves", {{"birth", p.moves.birth}, {"death", p.moves.death}, {"shift", p.moves.shift}}}};
}

PriorConfig prior_from_json(const Json& j) {
  check_keys(j, {"omega", "eta", "p", "q", "delta_min", "delta_max", "n_max", "moves"}, "prior");
  PriorConfig p;
  read_opt(j, "omega", p.omega);
  read_opt(j, "eta", p.eta);
  read_opt(j, "p", p.p);
  read_opt(j, "q", p.q);
  read_opt(j, "delta_min", p.delta_min);
  read_opt(j, "delta_max", p.delta_max);
  read_opt(j, "n_max", p.n_max);
  if (j.contains("moves")) {
    const auto& m = j.at("moves");
    check_keys(m, {"birth", "death", "shift"}, "prior.moves");
    read_opt(m, "birth", p.moves.birth);
    read_opt(m, "death", p.moves.death);
    read_opt(m, "shift", p.moves.shift);
  }
  return p;
}

Json likelihood_to_json(const LikelihoodSpec& l) {
  Json j;
  if (const auto* g = std::get_if<GaussianFamily>(&l.family)) {
    j["family"] = "gaussian";
    j["sigma2_prior"] = {{"shape", g->sigma2_shape}, {"scale", g->sigma2_scale}};
    j["initial_sigma2"] = g->initial_sigma2;
  } else {
    j["family"] = "binomial";
  }
  if (const auto* f = std::get_if<FixedBaseline>(&l.baseline)) {
    j["baseline"] = {{"kind", "fixed"}, {"values", from_vec(f->values)}};
  } else {
    const auto& c = std::get<CarBaseline>(l.baseline);
    j["baseline"] = {{"kind", "car"},
                     {"tau_prior", {{"shape", c.tau_shape}, {"scale", c.tau_scale}}},
                     {"proposal_sd", c.proposal_sd},
                     {"initial_tau", c.initial_tau},
                     {"update_tau", c.update_tau},
                     {"center", c.center},
                     {"initial", from_vec(c.initial)}};
  }
  return j;
}

LikelihoodSpec likelihood_from_json(const Json& j) {
  check_keys(j, {"family", "sigma2_prior", "initial_sigma2", "baseline"}, "likelihood");
  LikelihoodSpec l;
  const auto family = j.value("family", std::string("gaussian"));
  if (family == "gaussian") {
    GaussianFamily g;
    if (j.contains("sigma2_prior")) {
      const auto& p = j.at("sigma2_prior");
      check_keys(p, {"shape", "scale"}, "likelihood.sigma2_prior");
      read_opt(p, "shape", g.sigma2_shape);
      read_opt(p, "scale", g.sigma2_scale);
    }
    read_opt(j, "initial_sigma2", g.initial_sigma2);
    l.family = g;
  } else if (family == "binomial") {
    if (j.contains("sigma2_prior") || j.contains("initial_sigma2"))
      throw Error(ErrorCode::Config, "sigma2 settings apply to the gaussian family only");
    l.family = BinomialFamily{};
  } else {
    throw Error(ErrorCode::Config, "unknown family '" + family + "'");
  }
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    const auto kind = b.value("kind", std::string("fixed"));
    if (kind == "fixed") {
      check_keys(b, {"kind", "values"}, "likelihood.baseline");
      FixedBaseline f;
      if (b.contains("values")) f.values = to_vec(b.at("values"));
      l.baseline = f;
    } else if (kind == "car") {
      check_keys(b, {"kind", "tau_prior", "proposal_sd", "initial_tau", "update_tau", "center", "initial"},
                 "likelihood.baseline");
      CarBaseline c;
      if (b.contains("tau_prior")) {
        const auto& p = b.at("tau_prior");
        check_keys(p, {"shape", "scale"}, "likelihood.baseline.tau_prior");
        read_opt(p, "shape", c.tau_shape);
        read_opt(p, "scale", c.tau_scale);
      }
      read_opt(b, "proposal_sd", c.proposal_sd);
      read_opt(b, "initial_tau", c.initial_tau);
      read_opt(b, "update_tau", c.update_tau);
      read_opt(b, "center", c.center);
      if (b.contains("initial")) c.initial = to_vec(b.at("initial"));
      l.baseline = c;
    } else {
      throw Error(ErrorCode::Config, "unknown baseline kind '" + kind + "'");
    }
  }
  return l;
}

Json schedule_to_json(const SamplerSchedule& s) {
  return {{"iterations", s.iterations}, {"burn_in", s.burn_in}, {"thin", s.thin}};
}

void schedule_from_json(const Json& j, SamplerSchedule& s, const std::string& where) {
  check_keys(j, {"iterations", "burn_in", "thin"}, where);
  read_opt(j, "iterations", s.iterations);
  read_opt(j, "burn_in", s.burn_in);
  read_opt(j, "thin", s.thin);
}

}  // namespace

Json config_to_json(const RunConfig& c) {
  Json regions = Json::array();
  for (const auto& r : c.regions) regions.push_back({{"box", box_to_json(r.box)}, {"data", r.data}});
  Json edges = Json::array();
  for (const auto& [a, b] : c.edges) edges.push_back({a, b});
  Json sched = schedule_to_json(c.schedule);
  sched["trace_points"] = c.trace_points;
  const auto& cv = c.cv;
  Json j = {{"regions", regions},
            {"edges", edges},
            {"domain_mode", c.domain_mode == DomainMode::Union ? "union" : "intersection"},
            {"prior", prior_to_json(c.prior)},
            {"likelihood", likelihood_to_json(c.likelihood)},
            {"schedule", sched},
            {"cv",
             {{"folds", cv.folds},
              {"repetitions", cv.repetitions},
              {"fold_schedule", schedule_to_json(cv.fold_schedule)},
              {"initial_upper", cv.initial_upper},
              {"growth_factor", cv.growth_factor},
              {"beta", cv.beta},
              {"ei_threshold_ratio", cv.ei_threshold_ratio},
              {"max_evals", cv.max_evals},
              {"omega_cap", cv.omega_cap},
              {"transform", transform_name(cv.transform)},
              {"threads", cv.threads}}},
            {"output_dir", c.output_dir},
            {"verbosity", c.verbosity},
            {"seed", c.seed}};
  if (c.weights) j["weights"] = from_mat(*c.weights);
  return j;
}

RunConfig config_from_json(const Json& j) {
  try {
    check_keys(j,
               {"regions", "edges", "weights", "domain_mode", "prior", "likelihood", "schedule", "cv", "output_dir",
                "verbosity", "seed"},
               "config");
    RunConfig c;
    for (const auto& r : j.at("regions")) {
      check_keys(r, {"box", "data"}, "regions[]");
      c.regions.push_back({box_from_json(r.at("box")), r.value("data", std::string())});
    }
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        const auto pair = e.get<std::vector<int>>();
        if (pair.size() != 2) throw Error(ErrorCode::Config, "edges are [a, b] pairs");
        c.edges.emplace_back(pair[0], pair[1]);
      }
    }
    if (j.contains("weights")) c.weights = to_mat(j.at("weights"));
    const auto mode = j.value("domain_mode", std::string("intersection"));
    if (mode == "union") c.domain_mode = DomainMode::Union;
    else if (mode != "intersection") throw Error(ErrorCode::Config, "domain_mode must be intersection or union");
    if (j.contains("prior")) c.prior = prior_from_json(j.at("prior"));
    if (j.contains("likelihood")) c.likelihood = likelihood_from_json(j.at("likelihood"));
    if (j.contains("schedule")) {
      Json sched = j.at("schedule");
      if (sched.is_object() && sched.contains("trace_points")) {
        c.trace_points = sched.at("trace_points").get<int>();
        sched.erase("trace_points");
      }
      schedule_from_json(sched, c.schedule, "schedule");
    }
    if (j.contains("cv")) {
      const auto& v = j.at("cv");
      check_keys(v,
                 {"folds", "repetitions", "fold_schedule", "initial_upper", "growth_factor", "beta",
                  "ei_threshold_ratio", "max_evals", "omega_cap", "transform", "threads"},
                 "cv");
      read_opt(v, "folds", c.cv.folds);
      read_opt(v, "repetitions", c.cv.repetitions);
      if (v.contains("fold_schedule")) schedule_from_json(v.at("fold_schedule"), c.cv.fold_schedule, "cv.fold_schedule");
      read_opt(v, "initial_upper", c.cv.initial_upper);
      read_opt(v, "growth_factor", c.cv.growth_factor);
      read_opt(v, "beta", c.cv.beta);
      read_opt(v, "ei_threshold_ratio", c.cv.ei_threshold_ratio);
      read_opt(v, "max_evals", c.cv.max_evals);
      read_opt(v, "omega_cap", c.cv.omega_cap);
      if (v.contains("transform")) c.cv.transform = transform_from(v.at("transform").get<std::string>());
      read_opt(v, "threads", c.cv.threads);
    }
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "verbosity", c.verbosity);
    read_opt(j, "seed", c.seed);
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config: ") + e.what());
  }
}

RunConfig read_config(const std::filesystem::path& path) { return config_from_json(read_json(path)); }

RegionGraph config_graph(const RunConfig& c) {
  std::vector<CovariateBox> boxes;
  for (const auto& r : c.regions) boxes.push_back(r.box);
  if (c.weights) {
    RegionGraph g;
    g.boxes = std::move(boxes);
    g.weights = *c.weights;
    g.domain_mode = c.domain_mode;
    return g;
  }
  return RegionGraph::from_edges(std::move(boxes), c.edges, c.domain_mode);
}

Problem load_problem(const RunConfig& c, const std::filesystem::path& base) {
  if (c.regions.empty()) throw Error(ErrorCode::Config, "config lists no regions");
  Dataset data;
  for (const auto& r : c.regions) {
    if (r.data.empty()) {
      RegionData empty;
      empty.x.resize(0, r.box.dim());
      empty.y.resize(0);
      if (!c.likelihood.gaussian()) empty.trials = Eigen::VectorXi(0);
      data.push_back(std::move(empty));
      continue;
    }
    const std::filesystem::path p = std::filesystem::path(r.data).is_absolute() ? std::filesystem::path(r.data) : base / r.data;
    data.push_back(read_region_csv(p));
  }
  return validate_problem(config_graph(c), std::move(data), c.prior, c.likelihood);
}

std::vector<std::vector<Eigen::VectorXd>> random_trace_points(const RegionGraph& graph, int count,
                                                              std::uint64_t seed) {
  std::vector<std::vector<Eigen::VectorXd>> out(static_cast<std::size_t>(graph.region_count()));
  for (int k = 0; k < graph.region_count(); ++k) {
    const auto box = graph.sampling_box(k);
    Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(k)});
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd x(box.dim());
      for (int d = 0; d < box.dim(); ++d) x(d) = rng.uniform(box.lower(d), box.upper(d));
      out[k].push_back(std::move(x));
    }
  }
  return out;
}

}  // namespace bsmmr
