#include <iostream>

#include <CLI11.hpp>

#include "ldlif/error.hpp"
#include "ldlif/events.hpp"
#include "ldlif/run.hpp"
#include "ldlif/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Linear-decay LIF networks and a cycle-level SRAM CIM macro simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run_cmd = app.add_subcommand("run", "Train, evaluate, simulate on the macro, or report cost");
    run_cmd->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "Override the configuration seed");
    run_cmd->add_option("--out", out_dir, "Override the output directory");

    ldlif::SyntheticParams gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic labelled spike dataset (LDLS)");
    gen_cmd->add_option("--classes", gen.classes, "Number of classes")->required();
    gen_cmd->add_option("--width", gen.width, "Input neurons")->required();
    gen_cmd->add_option("--steps", gen.timesteps, "Timesteps per sample")->required();
    gen_cmd->add_option("--seed", gen.seed, "RNG seed")->required();
    gen_cmd->add_option("--out", gen_out, "Output file")->required();
    gen_cmd->add_option("--samples", gen.samples, "Number of samples")->capture_default_str();
    gen_cmd->add_option("--rate-high", gen.rate_high, "Firing probability of class neurons")->capture_default_str();
    gen_cmd->add_option("--rate-low", gen.rate_low, "Background firing probability")->capture_default_str();

    std::string inspect_path;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print header and counts of an LDLF/LDLS file");
    inspect_cmd->add_option("--events", inspect_path, "Event or dataset file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd) {
        ldlif::RunOverrides ov;
        ov.seed = seed;
        if (out_dir) ov.output_dir = *out_dir;
        return ldlif::run(config_path, ov, std::cout, std::cerr);
    }
    try {
        if (*gen_cmd) {
            ldlif::save_dataset(gen_out, ldlif::gen_synthetic(gen));
            std::cout << gen_out << '\n';
        } else if (*inspect_cmd) {
            ldlif::describe_event_file(std::cout, inspect_path);
        }
    } catch (const ldlif::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
