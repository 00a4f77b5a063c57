#include "bsmmr/domain.hpp"

#include <cmath>
#include <sstream>

namespace bsmmr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ObservationOutOfBox: return "ObservationOutOfBox";
    case ErrorCode::BadHyperparameter: return "BadHyperparameter";
    case ErrorCode::TrialsMissing: return "TrialsMissing";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::MonotoneViolation: return "MonotoneViolation";
    case ErrorCode::EmptySubprocess: return "EmptySubprocess";
    case ErrorCode::DomainNotCovered: return "DomainNotCovered";
    case ErrorCode::EmptyChain: return "EmptyChain";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string join_issues(const std::vector<Issue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << to_string(issues[i].code) << ": " << issues[i].message;
  }
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(issues.empty() ? ErrorCode::Config : issues.front().code, join_issues(issues)),
      issues_(std::move(issues)) {}

std::optional<CovariateBox> intersect(const CovariateBox& a, const CovariateBox& b) {
  CovariateBox out{a.lower.cwiseMax(b.lower), a.upper.cwiseMin(b.upper)};
  if (!(out.lower.array() < out.upper.array()).all()) return std::nullopt;
  return out;
}

CovariateBox hull(const CovariateBox& a, const CovariateBox& b) {
  return {a.lower.cwiseMin(b.lower), a.upper.cwiseMax(b.upper)};
}

RegionGraph RegionGraph::from_edges(std::vector<CovariateBox> boxes,
                                    const std::vector<std::pair<int, int>>& edges, DomainMode mode) {
  const auto k = static_cast<Eigen::Index>(boxes.size());
  RegionGraph g{std::move(boxes), Eigen::MatrixXd::Zero(k, k), mode};
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= k || b >= k || a == b)
      throw Error(ErrorCode::InvalidGraph, "edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    g.weights(a, b) = 1.0;
    g.weights(b, a) = 1.0;
  }
  return g;
}

bool RegionGraph::has_coupling() const { return weights.size() > 0 && (weights.array() > 0.0).any(); }

std::vector<int> RegionGraph::neighbors(int k) const {
  std::vector<int> out;
  for (int j = 0; j < region_count(); ++j)
    if (j != k && weights(k, j) > 0.0) out.push_back(j);
  return out;
}

std::vector<DomainPiece> RegionGraph::pair_domain(int k, int kp) const {
  const auto& a = boxes[k];
  const auto& b = boxes[kp];
  auto common = intersect(a, b);
  if (domain_mode == DomainMode::Intersection) {
    if (!common) return {};
    return {{*common, 1.0}};
  }
  std::vector<DomainPiece> pieces{{a, 1.0}, {b, 1.0}};
  if (common) pieces.push_back({*common, -1.0});
  return pieces;
}

CovariateBox RegionGraph::sampling_box(int k) const {
  CovariateBox box = boxes[k];
  if (domain_mode == DomainMode::Union)
    for (int j : neighbors(k)) box = hull(box, boxes[j]);
  return box;
}

Problem validate_problem(RegionGraph graph, Dataset data, PriorConfig prior, LikelihoodSpec lik) {
  std::vector<Issue> issues;
  auto fail = [&](ErrorCode c, std::string msg) { issues.push_back({c, std::move(msg)}); };

  const int k = graph.region_count();
  if (k < 1) fail(ErrorCode::DimensionMismatch, "at least one region required");
  const int m = graph.dim();
  for (int r = 0; r < k; ++r) {
    const auto& b = graph.boxes[r];
    if (b.dim() != m || b.upper.size() != m)
      fail(ErrorCode::DimensionMismatch, "region " + std::to_string(r) + " box dimension differs");
    else if (!b.valid())
      fail(ErrorCode::InvalidBox, "region " + std::to_string(r) + " box needs lower < upper on every axis");
  }

  if (graph.weights.rows() != k || graph.weights.cols() != k) {
    fail(ErrorCode::DimensionMismatch, "weight matrix must be K x K");
  } else {
    for (int a = 0; a < k; ++a) {
      if (graph.weights(a, a) != 0.0) fail(ErrorCode::InvalidGraph, "weight diagonal must be zero");
      for (int b = 0; b < k; ++b) {
        const double w = graph.weights(a, b);
        if (!std::isfinite(w) || w < 0.0)
          fail(ErrorCode::InvalidGraph, "weights must be finite and nonnegative");
        if (w != graph.weights(b, a))
          fail(ErrorCode::InvalidGraph,
               "weights not symmetric at (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
    }
  }

  if (!(prior.omega >= 0.0)) fail(ErrorCode::BadHyperparameter, "omega must be >= 0");
  if (!(prior.eta > 1.0)) fail(ErrorCode::BadHyperparameter, "eta must be > 1");
  if (!std::isfinite(prior.p)) fail(ErrorCode::BadHyperparameter, "p must be finite");
  if (!(prior.q >= 0.0)) fail(ErrorCode::BadHyperparameter, "q must be >= 0");
  if (!(prior.delta_min < prior.delta_max)) fail(ErrorCode::BadHyperparameter, "delta_min must be < delta_max");
  if (prior.n_max < 1) fail(ErrorCode::BadHyperparameter, "n_max must be >= 1");
  const auto& mv = prior.moves;
  if (mv.birth < 0 || mv.death < 0 || mv.shift < 0 || std::abs(mv.birth + mv.death + mv.shift - 1.0) > 1e-12)
    fail(ErrorCode::BadHyperparameter, "move probabilities must be nonnegative and sum to 1");
  if ((mv.birth > 0) != (mv.death > 0))
    fail(ErrorCode::BadHyperparameter, "birth and death must both be positive or both zero");

  const bool binomial = !lik.gaussian();
  if (auto* g = std::get_if<GaussianFamily>(&lik.family)) {
    if (!(g->sigma2_shape > 0 && g->sigma2_scale > 0)) fail(ErrorCode::BadHyperparameter, "Inverse-Gamma hyperparameters must be > 0");
    if (!(g->initial_sigma2 > 0)) fail(ErrorCode::BadHyperparameter, "initial sigma2 must be > 0");
  }
  if (auto* f = std::get_if<FixedBaseline>(&lik.baseline)) {
    if (f->values.size() == 0) f->values = Eigen::VectorXd::Zero(k);
    if (f->values.size() != k) fail(ErrorCode::DimensionMismatch, "fixed baseline needs K values");
  } else {
    auto& c = std::get<CarBaseline>(lik.baseline);
    if (!(c.tau_shape > 0 && c.tau_scale > 0)) fail(ErrorCode::BadHyperparameter, "Gamma hyperparameters must be > 0");
    if (!(c.proposal_sd > 0)) fail(ErrorCode::BadHyperparameter, "proposal_sd must be > 0");
    if (!(c.initial_tau > 0)) fail(ErrorCode::BadHyperparameter, "initial tau must be > 0");
    if (c.initial.size() == 0) c.initial = Eigen::VectorXd::Zero(k);
    if (c.initial.size() != k) fail(ErrorCode::DimensionMismatch, "CAR initial baseline needs K values");
  }

  if (static_cast<int>(data.size()) != k) {
    fail(ErrorCode::DimensionMismatch, "dataset must have one entry per region");
  } else {
    for (int r = 0; r < k; ++r) {
      const auto& d = data[r];
      const std::string tag = "region " + std::to_string(r);
      if (d.x.rows() != d.y.size() || (d.x.rows() > 0 && d.x.cols() != m)) {
        fail(ErrorCode::DimensionMismatch, tag + " observation matrix shape");
        continue;
      }
      if (d.trials.has_value() != binomial) {
        fail(ErrorCode::TrialsMissing, tag + (binomial ? " needs trial counts" : " has trials but family is Gaussian"));
      }
      if (d.trials && d.trials->size() != d.y.size()) fail(ErrorCode::DimensionMismatch, tag + " trials length");
      if (m == graph.boxes[r].dim()) {
        for (Eigen::Index t = 0; t < d.x.rows(); ++t) {
          if (!graph.boxes[r].contains(d.x.row(t).transpose())) {
            fail(ErrorCode::ObservationOutOfBox, tag + " row " + std::to_string(t) + " outside its box");
            break;
          }
        }
      }
      for (Eigen::Index t = 0; t < d.y.size(); ++t) {
        if (!std::isfinite(d.y(t))) {
          fail(ErrorCode::DimensionMismatch, tag + " non-finite response");
          break;
        }
        if (binomial && d.trials && d.trials->size() == d.y.size()) {
          const double n = (*d.trials)(t);
          if (n < 1 || d.y(t) < 0 || d.y(t) > n || d.y(t) != std::floor(d.y(t))) {
            fail(ErrorCode::BadHyperparameter, tag + " row " + std::to_string(t) + " needs integer 0 <= y <= trials");
            break;
          }
        }
      }
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));
  return Problem{std::move(graph), std::move(data), prior, std::move(lik)};
}

}  // namespace bsmmr
