#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <doctest.h>

#include "ldlif/checkpoint.hpp"
#include "ldlif/config.hpp"
#include "ldlif/error.hpp"
#include "ldlif/events.hpp"
#include "ldlif/random.hpp"
#include "ldlif/run.hpp"
#include "ldlif/synthetic.hpp"

using namespace ldlif;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ldlif_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string event_bytes(std::uint32_t version, std::uint32_t n, std::uint32_t t,
                        const std::vector<std::pair<std::uint32_t, std::uint32_t>>& ev) {
    std::string s = "LDLF";
    put_u32(s, version);
    put_u32(s, n);
    put_u32(s, t);
    for (auto [ts, id] : ev) {
        put_u32(s, ts);
        put_u32(s, id);
    }
    return s;
}

SpikeEventFile parse(const std::string& bytes) {
    std::istringstream is(bytes);
    return read_event_file(is);
}

const char* kTrainConfig = R"({
  "mode": "train",
  "seed": 5,
  "network": {"timesteps": 20, "layers": [
    {"type": "dense", "in": 16, "out": 8},
    {"type": "dense", "in": 8, "out": 2, "beta": 0.1}
  ]},
  "dataset": {"synthetic": {"classes": 2, "width": 16, "timesteps": 20, "train_samples": 40, "test_samples": 20}},
  "train": {"epochs": 3, "batch_size": 8}
})";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("event file examples") {
    auto f = parse(event_bytes(1, 5, 4, {}));
    auto train = f.densify();
    REQUIRE(train.size() == 4);
    for (const auto& row : train) CHECK(row == SpikeVector(5, 0));

    f = parse(event_bytes(1, 10, 5, {{3, 7}}));
    train = f.densify();
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t n = 0; n < 10; ++n) CHECK(train[t][n] == (t == 3 && n == 7 ? 1 : 0));
}

TEST_CASE("event file errors") {
    std::string bad_magic = event_bytes(1, 2, 2, {});
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(parse(bad_magic), FormatError);
    CHECK_THROWS_AS(parse(event_bytes(2, 2, 2, {})), FormatError);
    CHECK_THROWS_AS(parse("LDL"), FormatError);
    std::string ragged = event_bytes(1, 2, 2, {{0, 1}});
    ragged.pop_back();
    CHECK_THROWS_AS(parse(ragged), FormatError);

    try {
        parse(event_bytes(1, 4, 4, {{0, 1}, {1, 0}, {0, 3}}));
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("event 2") != std::string::npos);
    }
    try {
        parse(event_bytes(1, 4, 4, {{0, 1}, {0, 1}}));
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("event 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(event_bytes(1, 4, 4, {{4, 0}})), ValidationError);
    CHECK_THROWS_AS(parse(event_bytes(1, 4, 4, {{0, 4}})), ValidationError);
}

TEST_CASE("event file round trips are lossless") {
    const auto dir = scratch("events");
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        SpikeTrain train(1 + rng() % 30, SpikeVector(1 + rng() % 40));
        for (auto& row : train)
            for (auto& b : row) b = bernoulli(rng, 0.2);
        const auto path = dir / "a.ldlf";
        save_events(path, train);
        CHECK(load_events(path) == train);
        const std::string bytes = slurp(path);
        save_events(dir / "b.ldlf", load_events(path));
        CHECK(slurp(dir / "b.ldlf") == bytes);
    }
    CHECK_THROWS_AS(load_events(dir / "missing.ldlf"), FormatError);
}

TEST_CASE("dataset files") {
    const auto dir = scratch("dataset");
    SyntheticParams sp;
    sp.samples = 9;
    sp.timesteps = 12;
    sp.width = 20;
    const Dataset data = gen_synthetic(sp);
    save_dataset(dir / "d.ldls", data);
    const Dataset back = load_dataset(dir / "d.ldls");
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].label == data[i].label);
        CHECK(back[i].input == data[i].input);
    }
    std::ostringstream desc;
    describe_event_file(desc, dir / "d.ldls");
    CHECK(desc.str().find("samples: 9") != std::string::npos);

    save_events(dir / "e.ldlf", data[0].input);
    std::ostringstream d2;
    describe_event_file(d2, dir / "e.ldlf");
    CHECK(d2.str().find("neurons: 20") != std::string::npos);
    CHECK(d2.str().find("timesteps: 12") != std::string::npos);
}

TEST_CASE("synthetic generator") {
    SyntheticParams sp;
    sp.samples = 8;
    const auto a = gen_synthetic(sp), b = gen_synthetic(sp);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].input == b[i].input);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].label == static_cast<int>(i % 4));

    sp.rate_low = 0.0;
    sp.rate_high = 1.0;
    for (const auto& s : gen_synthetic(sp))
        for (const auto& row : s.input)
            for (std::size_t n = 0; n < 64; ++n) CHECK(row[n] == (n / 16 == static_cast<std::size_t>(s.label) ? 1 : 0));

    SyntheticParams wide;
    wide.samples = 1;
    wide.timesteps = 10000;
    const auto big = gen_synthetic(wide);
    std::size_t fired = 0;
    for (const auto& row : big[0].input) fired += row[0];
    const double expect = 0.3 * 10000, sigma = std::sqrt(10000 * 0.3 * 0.7);
    CHECK(std::abs(static_cast<double>(fired) - expect) < 3 * sigma);

    SyntheticParams bad;
    bad.rate_low = 0.5;
    bad.rate_high = 0.4;
    CHECK_THROWS_AS(gen_synthetic(bad), ParameterError);
    bad = SyntheticParams{};
    bad.rate_high = 1.5;
    CHECK_THROWS_AS(gen_synthetic(bad), ParameterError);
    bad = SyntheticParams{};
    bad.width = 3;
    CHECK_THROWS_AS(gen_synthetic(bad), ParameterError);
}

TEST_CASE("checkpoint round trip") {
    NetworkSpec spec;
    spec.timesteps = 5;
    spec.layers = {LayerSpec::dense(6, 4, LdLifParams{0.3, 1.0}), LayerSpec::dense(4, 2, LdLifParams{-0.1, 1.5})};
    const auto params = init_params(spec, 9, 2.0);
    const Checkpoint ck = Checkpoint::from_params(spec, params, 4);
    std::stringstream ss;
    write_checkpoint(ss, ck);
    const Checkpoint back = read_checkpoint(ss);
    CHECK(back.spec_hash == spec.hash());
    CHECK(back.beta == std::vector<double>{0.3, -0.1});
    CHECK(back.theta == std::vector<double>{1.0, 1.5});
    const auto p2 = back.to_params(spec);
    for (std::size_t l = 0; l < 2; ++l) CHECK(p2.layers[l].weights.data() == params.layers[l].weights.data());
    const auto q1 = quantize_network(spec, params, QuantSettings{});
    const auto q2 = back.to_quantized(spec, QuantSettings{});
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(q1.weights[l].q == q2.weights[l].q);
        CHECK(q1.constants[l].th == q2.constants[l].th);
        CHECK(q1.constants[l].dcy == q2.constants[l].dcy);
    }

    NetworkSpec other = spec;
    other.timesteps = 6;
    CHECK_THROWS_AS(back.check_spec(other), ParameterError);

    std::stringstream slim;
    write_checkpoint(slim, Checkpoint::from_params(spec, params, 4, false));
    CHECK_THROWS_AS(read_checkpoint(slim).to_params(spec), StateError);

    std::string bytes = ss.str();
    bytes[0] = 'X';
    std::istringstream corrupt(bytes);
    CHECK_THROWS_AS(read_checkpoint(corrupt), FormatError);
}

TEST_CASE("config parsing") {
    const RunConfig c = parse_run_config(kTrainConfig);
    CHECK(c.mode == RunMode::Train);
    CHECK(c.seed == 5);
    CHECK(c.train.seed == 5);
    CHECK(c.dataset->synthetic->seed == 5);
    CHECK(c.network->layers.size() == 2);
    CHECK(std::get<LdLifParams>(c.network->layers[1].neuron).beta == 0.1);
    CHECK(c.train.epochs == 3);

    const RunConfig o = parse_run_config(kTrainConfig, 11);
    CHECK(o.seed == 11);
    CHECK(o.dataset->synthetic->seed == 11);

    CHECK_THROWS_AS(parse_run_config("{"), FormatError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "cost", "bogus": 1})"), FormatError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "cost", "cost": {"neurons": 32, "nuerons": 3}})"), FormatError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "fly"})"), ParameterError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "train"})"), ParameterError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "cost", "scaler": {"shift": 20}})"), ParameterError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "cost", "cost": {"neurons": "many"}})"), FormatError);

    const RunConfig cost = parse_run_config(R"({"mode": "cost", "cost": {"neurons": 64, "ops_per_sop": 1}})");
    CHECK(cost.cost_neurons == 64);
    CHECK(cost.cost.ops_per_sop == 1);
}

TEST_CASE("run: cost mode") {
    const auto dir = scratch("run_cost");
    const RunConfig c = parse_run_config(R"({"mode": "cost"})");
    const auto art = execute(c);
    REQUIRE(art.count("cost_report.json") == 1);
    const auto j = nlohmann::json::parse(art.at("cost_report.json"));
    CHECK(j["parallel_latency_ns"].get<double>() == 21.0);
}

TEST_CASE("run: train, eval and macro-sim") {
    const auto dir = scratch("run_pipeline");
    {
        std::ofstream(dir / "train.json") << kTrainConfig;
    }
    std::ostringstream out, err;
    RunOverrides ov;
    ov.output_dir = dir / "train";
    REQUIRE(run(dir / "train.json", ov, out, err) == 0);
    CHECK(err.str().empty());
    for (const char* f : {"metrics.jsonl", "checkpoint.ldck", "summary.json"}) CHECK(fs::exists(dir / "train" / f));

    std::size_t lines = 0;
    std::istringstream metrics(slurp(dir / "train" / "metrics.jsonl"));
    for (std::string line; std::getline(metrics, line); ++lines)
        CHECK(nlohmann::json::parse(line).contains("beta"));
    CHECK(lines == 3);

    auto j = nlohmann::json::parse(kTrainConfig);
    j["checkpoint"] = (dir / "train" / "checkpoint.ldck").string();
    j.erase("train");
    j["mode"] = "eval";
    j["eval"] = {{"mode", "quantized"}};
    {
        std::ofstream(dir / "eval.json") << j.dump();
    }
    j["mode"] = "macro-sim";
    j.erase("eval");
    j["macro"] = {{"dump_trace", true}};
    {
        std::ofstream(dir / "macro.json") << j.dump();
    }
    ov.output_dir = dir / "eval";
    REQUIRE(run(dir / "eval.json", ov, out, err) == 0);
    ov.output_dir = dir / "macro";
    REQUIRE(run(dir / "macro.json", ov, out, err) == 0);
    CHECK(slurp(dir / "eval" / "predictions.csv") == slurp(dir / "macro" / "predictions.csv"));
    CHECK(slurp(dir / "eval" / "spike_rates.csv") == slurp(dir / "macro" / "spike_rates.csv"));
    CHECK(fs::exists(dir / "macro" / "macro_trace_sample0_layer0.csv"));
    CHECK(slurp(dir / "eval" / "spike_rates.csv").rfind("layer,t,rate,label\n", 0) == 0);

    // Same config and seed, same bytes.
    ov.output_dir = dir / "macro2";
    REQUIRE(run(dir / "macro.json", ov, out, err) == 0);
    for (const auto& e : fs::directory_iterator(dir / "macro"))
        CHECK(slurp(e.path()) == slurp(dir / "macro2" / e.path().filename()));
}

TEST_CASE("run: invalid config leaves no outputs") {
    const auto dir = scratch("run_invalid");
    {
        std::ofstream(dir / "bad.json") << R"({"mode": "train", "network": {"timesteps": 5, "layers": [{"in": 2, "out": 2}]}})";
    }
    std::ostringstream out, err;
    RunOverrides ov;
    ov.output_dir = dir / "out";
    CHECK(run(dir / "bad.json", ov, out, err) == 1);
    CHECK_FALSE(fs::exists(dir / "out"));
    const auto e = nlohmann::json::parse(err.str());
    CHECK(e["error"] == "parameter");
    CHECK(e["message"].get<std::string>().find("dataset") != std::string::npos);
}

}  // TEST_SUITE
