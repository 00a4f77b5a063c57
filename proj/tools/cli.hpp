#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsmmr/io.hpp"
#include "bsmmr/simulate.hpp"

namespace bsmmr::cli {

// Stream ids under the master seed.
inline constexpr std::uint64_t kSimulateStream = 1;
inline constexpr std::uint64_t kTuneStream = 2;
inline constexpr std::uint64_t kFitStream = 3;
inline constexpr std::uint64_t kTraceStream = 4;

enum class Scale { Desk, Paper };

/// Config for a preset with data files region1.csv, ..., regionK.csv.
RunConfig preset_config(const Scenario& scenario, Scale scale, std::uint64_t seed);

/// Runs one command line. Returns 0 on success, 1 on runtime failure and 2 on
/// usage or config errors. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bsmmr::cli
