#pragma once

// Run configuration, read from a JSON document. Unknown keys anywhere are
// errors. The schema is documented in docs/config.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ldlif/cost.hpp"
#include "ldlif/evaluate.hpp"
#include "ldlif/network.hpp"
#include "ldlif/synthetic.hpp"
#include "ldlif/train.hpp"

namespace ldlif {

enum class RunMode { Train, Eval, MacroSim, Cost };

RunMode parse_run_mode(const std::string& s);
const char* to_string(RunMode m) noexcept;

struct DatasetSource {
    /// Either synthetic parameters (train and test split by seed) or LDLS files.
    std::optional<SyntheticParams> synthetic;
    std::size_t synthetic_test_samples = 200;
    std::optional<std::filesystem::path> train_file;
    std::optional<std::filesystem::path> test_file;
};

struct RunConfig {
    RunMode mode = RunMode::Cost;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::optional<NetworkSpec> network;
    std::optional<DatasetSource> dataset;
    TrainConfig train;
    EvalMode eval_mode = EvalMode::Float;
    std::optional<std::filesystem::path> checkpoint;
    QuantSettings quant;
    bool dump_trace = false;
    std::size_t trace_samples = 1;
    CostParams cost;
    std::int64_t cost_neurons = 32;
    std::uint64_t cost_sops = 0;

    /// Mode-specific required fields; paths that must already exist.
    void validate() const;
};

/// Throws FormatError on malformed JSON or unknown keys, ParameterError on bad values.
/// `seed_override` replaces the top-level seed before anything derives from it.
RunConfig parse_run_config(const std::string& json_text, std::optional<std::uint64_t> seed_override = {});
RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});

}  // namespace ldlif
