#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "roadrunner/bench/harness.hpp"
#include "roadrunner/runtime/config.hpp"
#include "roadrunner/transport/hose.hpp"

namespace {

bool parse_size(const std::string& text, std::uint64_t& out) {
    std::size_t idx = 0;
    unsigned long long value;
    try {
        value = std::stoull(text, &idx);
    } catch (...) {
        return false;
    }
    std::string suffix = text.substr(idx);
    std::uint64_t mult = 1;
    if (suffix == "" || suffix == "B")
        mult = 1;
    else if (suffix == "KiB" || suffix == "K" || suffix == "k")
        mult = 1024;
    else if (suffix == "KB")
        mult = 1000;
    else if (suffix == "MiB" || suffix == "M" || suffix == "m")
        mult = 1024 * 1024;
    else if (suffix == "MB")
        mult = 1000 * 1000;
    else if (suffix == "GiB" || suffix == "G" || suffix == "g")
        mult = 1024ull * 1024 * 1024;
    else if (suffix == "GB")
        mult = 1000ull * 1000 * 1000;
    else
        return false;
    out = value * mult;
    return out > 0;
}

// The config supplies runtime knobs plus the guest paths, looked up by
// function name.
int build_spec(const std::string& config_path, rr::bench::SweepSpec& spec) {
    auto config = rr::runtime::load_config(config_path);
    if (!config.ok()) {
        std::fprintf(stderr, "config error: %s\n", config.error().to_string().c_str());
        return 1;
    }
    spec.timeout_ms = config.value().timeout_ms;
    spec.runtime_dir = config.value().runtime_dir + "/bench";
    for (const auto& record : config.value().functions) {
        if (record.name == "producer" && !record.wasm_path.empty())
            spec.producer_wasm = record.wasm_path;
        if (record.name == "consumer" && !record.wasm_path.empty())
            spec.consumer_wasm = record.wasm_path;
    }
    if (spec.producer_wasm.empty() || spec.consumer_wasm.empty()) {
        std::fprintf(stderr,
                     "config error: %s must define functions named 'producer' and 'consumer' "
                     "with wasm paths\n",
                     config_path.c_str());
        return 1;
    }
    return 0;
}

int parse_modes(const std::vector<std::string>& names, std::vector<rr::bench::BenchMode>& out) {
    for (const std::string& name : names) {
        auto mode = rr::bench::parse_bench_mode(name);
        if (!mode) {
            std::fprintf(stderr, "unknown mode '%s'\n", name.c_str());
            return 1;
        }
        out.push_back(*mode);
    }
    return 0;
}

int parse_sizes(const std::vector<std::string>& texts, std::vector<std::uint64_t>& out) {
    for (const std::string& text : texts) {
        std::uint64_t size;
        if (!parse_size(text, size)) {
            std::fprintf(stderr, "unparseable size '%s'\n", text.c_str());
            return 1;
        }
        out.push_back(size);
    }
    return 0;
}

int emit(const std::vector<rr::bench::TransferReport>& reports, const std::string& out_path) {
    if (auto s = rr::bench::emit_report(reports, out_path); !s.ok()) {
        std::fprintf(stderr, "emit error: %s\n", s.error().to_string().c_str());
        return 2;
    }
    std::printf("wrote %zu trial rows to %s (+ %s.summary.csv)\n", reports.size(),
                out_path.c_str(), out_path.c_str());
    for (const auto& row : rr::bench::summarize(reports)) {
        std::printf("  %-17s %12llu B  mean %.6fs  stddev %.6fs  %.2f rps\n", row.mode.c_str(),
                    static_cast<unsigned long long>(row.payload_bytes), row.mean_t_total,
                    row.stddev_t_total, row.mean_throughput_rps);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"payload sweep and fanout benchmarks over every transfer plane"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::vector<std::string> mode_names{"user", "kernel", "network", "baseline"};
    std::vector<std::string> size_texts{"1KiB", "64KiB", "1MiB", "10MiB", "100MiB"};
    std::uint32_t trials = 10, warmup = 2, degree = 10;
    std::uint64_t seed = 1;
    bool huge = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_path, "CSV output path")->required();
        cmd->add_option("--modes", mode_names, "modes to run")->delimiter(',');
        cmd->add_option("--sizes", size_texts, "payload sizes")->delimiter(',');
        cmd->add_option("--trials", trials, "measured trials per cell");
        cmd->add_option("--warmup", warmup, "discarded warmup trials per cell");
        cmd->add_option("--seed", seed, "payload generator seed");
    };

    auto* sweep = app.add_subcommand("sweep", "sequential producer->consumer payload sweep");
    add_common(sweep);
    sweep->add_flag("--huge", huge, "append the 500MB point (needs >=1GiB guest memory)");

    auto* fanout = app.add_subcommand("fanout", "one source fanning out to k targets");
    add_common(fanout);
    fanout->add_option("--degree", degree, "fanout degree")->required();

    CLI11_PARSE(app, argc, argv);

    rr::bench::SweepSpec spec;
    if (int rc = build_spec(config_path, spec)) return rc;
    if (int rc = parse_modes(mode_names, spec.modes)) return rc;
    if (int rc = parse_sizes(size_texts, spec.payload_sizes)) return rc;
    if (huge) spec.payload_sizes.push_back(500ull * 1000 * 1000);
    spec.trials = trials;
    spec.warmup = warmup;
    spec.seed = seed;

    const auto& hose = rr::transport::hose_capability();
    std::fprintf(stderr, "zero-copy hose: %s%s%s\n", hose.available ? "available" : "unavailable",
                 hose.available ? "" : " - ", hose.available ? "" : hose.detail.c_str());

    if (sweep->parsed()) {
        auto reports = rr::bench::run_sequence(spec);
        if (!reports.ok()) {
            std::fprintf(stderr, "sweep aborted: %s\n", reports.error().to_string().c_str());
            return 2;
        }
        return emit(reports.value(), out_path);
    }
    auto reports = rr::bench::run_fanout(spec, degree);
    if (!reports.ok()) {
        std::fprintf(stderr, "fanout aborted: %s\n", reports.error().to_string().c_str());
        return 2;
    }
    return emit(reports.value(), out_path);
}
