#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "ldlif/config.hpp"

namespace ldlif {

/// Files produced by a run, keyed by name relative to the output directory.
/// Nothing touches the disk until the whole job has succeeded.
using Artifacts = std::map<std::string, std::string>;

Artifacts execute(const RunConfig& config);

/// Writes every artifact into `dir`, creating it if needed.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

/// Loads the config, executes it and writes artifacts. Returns the process
/// exit status; on failure prints a one-line JSON error object to `err`.
int run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& out,
        std::ostream& err);

/// CSV with columns layer,t,rate,label: one representative sample per label.
std::string spike_rates_csv(const SpikeRateStats& stats);

}  // namespace ldlif
