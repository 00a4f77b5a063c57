#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "bsmmr/chain.hpp"
#include "bsmmr/domain.hpp"
#include "bsmmr/egocv.hpp"
#include "bsmmr/rjmcmc.hpp"
#include "bsmmr/simulate.hpp"
#include "bsmmr/surface.hpp"

namespace bsmmr {

using Json = nlohmann::json;

/// Region data as CSV with header x1,...,xm,y[,trials].
std::string region_csv(const RegionData& data);
RegionData parse_region_csv(const std::string& text, const std::string& origin = "csv");
void write_region_csv(const std::filesystem::path& path, const RegionData& data);
RegionData read_region_csv(const std::filesystem::path& path);

Json box_to_json(const CovariateBox& box);
CovariateBox box_from_json(const Json& j);

/// {box, delta_min, delta_max, n_max, points: [{subset (1-based axes), location, level}]}
Json surface_to_json(const MonotoneSurface& s);
MonotoneSurface surface_from_json(const Json& j);

Json nuisance_to_json(const NuisanceState& n);
NuisanceState nuisance_from_json(const Json& j);

Json chain_to_json(const Chain& chain, bool with_traces = true);
Chain chain_from_json(const Json& j);

Json checkpoint_to_json(const SamplerCheckpoint& c);
SamplerCheckpoint checkpoint_from_json(const Json& j);

Json truth_to_json(const TrueFunction& f);
TrueFunction truth_from_json(const Json& j);

/// Trace series as long-form CSV (sweep, region, point, level); 1-based sweep.
std::string trace_csv(const Chain& chain);

struct RegionSource {
  CovariateBox box;
  std::string data;  // CSV path, relative to the config file
};

/// Everything a run needs in one document. Unknown keys are rejected.
struct RunConfig {
  std::vector<RegionSource> regions;
  std::vector<std::pair<int, int>> edges;  // 0-based
  std::optional<Eigen::MatrixXd> weights;  // overrides edges when present
  DomainMode domain_mode = DomainMode::Intersection;
  PriorConfig prior;
  LikelihoodSpec likelihood;
  SamplerSchedule schedule{120000, 20000, 40, {}, 1};
  int trace_points = 10;  // random locations per region
  CvConfig cv;
  std::string output_dir = "out";
  int verbosity = 1;
  std::uint64_t seed = 1;
};

Json config_to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);
RunConfig read_config(const std::filesystem::path& path);

/// Loads the region CSVs (relative to `base`), builds the graph and validates.
Problem load_problem(const RunConfig& c, const std::filesystem::path& base);
RegionGraph config_graph(const RunConfig& c);

/// `count` trace locations per region drawn uniformly in the sampling boxes.
std::vector<std::vector<Eigen::VectorXd>> random_trace_points(const RegionGraph& graph, int count,
                                                              std::uint64_t seed);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bsmmr
