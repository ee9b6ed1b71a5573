#include <atomic>
#include <csignal>
#include <cstdio>
#include <thread>

#include <CLI11.hpp>

#include "roadrunner/abi.hpp"
#include "roadrunner/checksum.hpp"
#include "roadrunner/runtime/shim.hpp"

namespace {

// 0 success, 1 config error, 2 transport error, 3 ABI error
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTransport = 2;
constexpr int kExitAbi = 3;

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

int exit_code_for(const rr::TransferError& err) {
    switch (err.kind) {
    case rr::ErrorKind::GuestAbiMissing: return kExitAbi;
    case rr::ErrorKind::RegistryMiss: return kExitConfig;
    default: return kExitTransport;
    }
}

int cmd_run(const std::string& config_path) {
    auto config = rr::runtime::load_config(config_path);
    if (!config.ok()) {
        std::fprintf(stderr, "config error: %s\n", config.error().to_string().c_str());
        return kExitConfig;
    }
    auto shim = rr::runtime::Shim::create(config.value());
    if (!shim.ok()) {
        std::fprintf(stderr, "startup error: %s\n", shim.error().to_string().c_str());
        return exit_code_for(shim.error());
    }
    if (auto s = shim.value()->start_listeners(); !s.ok()) {
        std::fprintf(stderr, "listener error: %s\n", s.error().to_string().c_str());
        return kExitTransport;
    }

    for (const auto& record : shim.value()->registry().records()) {
        std::fprintf(stderr, "function %u (%s): %s\n", record.function_id, record.name.c_str(),
                     rr::runtime::to_string(record.locality));
    }
    if (shim.value()->network_port() != 0) {
        std::fprintf(stderr, "network listener on port %u\n", shim.value()->network_port());
    }
    std::fprintf(stderr, "shim serving; send SIGINT or SIGTERM to stop\n");

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    shim.value()->stop_listeners();
    std::fprintf(stderr, "shim stopped\n");
    return kExitOk;
}

int cmd_send(const std::string& config_path, const std::string& workflow_hex,
             std::uint32_t source_fn, std::uint32_t target_fn, std::uint64_t bytes,
             std::uint64_t seed, const std::string& mode_name) {
    auto config = rr::runtime::load_config(config_path);
    if (!config.ok()) {
        std::fprintf(stderr, "config error: %s\n", config.error().to_string().c_str());
        return kExitConfig;
    }
    if (!workflow_hex.empty()) {
        auto wf = rr::workflow_from_hex(workflow_hex);
        if (!wf) {
            std::fprintf(stderr, "config error: workflow must be 32 hex chars\n");
            return kExitConfig;
        }
        config.value().workflow = *wf;
    }

    rr::runtime::DispatchOptions options;
    if (mode_name == "user")
        options.mode_override = rr::runtime::TransferMode::User;
    else if (mode_name == "kernel")
        options.mode_override = rr::runtime::TransferMode::Kernel;
    else if (mode_name == "network")
        options.mode_override = rr::runtime::TransferMode::Network;
    else if (mode_name != "auto") {
        std::fprintf(stderr, "config error: mode must be auto, user, kernel or network\n");
        return kExitConfig;
    }

    auto shim = rr::runtime::Shim::create(config.value());
    if (!shim.ok()) {
        std::fprintf(stderr, "startup error: %s\n", shim.error().to_string().c_str());
        return exit_code_for(shim.error());
    }

    // The source guest must hand its staged input back through
    // send_to_host; the echo guest does exactly that.
    auto payload = rr::abi::reference_payload(seed, bytes);
    auto capture = shim.value()->stage_and_run(source_fn, payload);
    if (!capture.ok()) {
        std::fprintf(stderr, "staging error: %s\n", capture.error().to_string().c_str());
        return exit_code_for(capture.error());
    }

    auto outcome = shim.value()->dispatch(source_fn, target_fn, capture.value(), options);
    if (!outcome.status.ok()) {
        std::fprintf(stderr, "transfer error (%s): %s\n", outcome.report.mode.c_str(),
                     outcome.status.error().to_string().c_str());
        return exit_code_for(outcome.status.error());
    }

    std::printf("mode=%s bytes=%llu t_total=%.6fs throughput=%.2f rps zero_copy=%d\n",
                outcome.report.mode.c_str(),
                static_cast<unsigned long long>(outcome.report.payload_bytes),
                outcome.report.t_total, outcome.report.throughput_rps, outcome.zero_copy ? 1 : 0);

    if (outcome.delivered) {
        auto sink = shim.value()->sink(target_fn);
        auto delivered = sink->instance().read_memory(*outcome.delivered);
        if (delivered.ok() &&
            rr::checksum64(delivered.value()) == rr::checksum64(payload.data(), payload.size())) {
            std::printf("local delivery verified: checksum match\n");
        } else {
            std::fprintf(stderr, "transfer error: delivered bytes mismatch\n");
            return kExitTransport;
        }
    }
    return kExitOk;
}

int cmd_check_abi(const std::string& wasm_path) {
    auto report = rr::abi::check_file(wasm_path);
    if (!report.ok()) {
        std::fprintf(stderr, "%s\n", report.error().to_string().c_str());
        return kExitAbi;
    }
    if (report.value().conformant) {
        std::printf("%s: conformant\n", wasm_path.c_str());
        return kExitOk;
    }
    std::printf("%s: NOT conformant\n", wasm_path.c_str());
    for (const auto& problem : report.value().problems) {
        std::printf("  %s: %s\n", rr::to_string(rr::ErrorKind::GuestAbiMissing), problem.c_str());
    }
    return kExitAbi;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sidecar shim for zero-serialization data transfer between Wasm functions"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "serve the configured functions and listeners");
    run->add_option("--config", config_path, "config file")->required();

    std::string send_config, workflow_hex, mode_name = "auto";
    std::uint32_t source_fn = 0, target_fn = 0;
    std::uint64_t bytes = 0, seed = 1;
    auto* send = app.add_subcommand("send", "stage a payload and transfer it once");
    send->add_option("--config", send_config, "config file")->required();
    send->add_option("--workflow", workflow_hex, "workflow id (32 hex chars)");
    send->add_option("--source", source_fn, "source function id")->required();
    send->add_option("--target", target_fn, "target function id")->required();
    send->add_option("--bytes", bytes, "payload size in bytes")->required();
    send->add_option("--seed", seed, "payload generator seed");
    send->add_option("--mode", mode_name, "auto|user|kernel|network");

    std::string wasm_path;
    auto* check = app.add_subcommand("check-abi", "check a guest module against the contract");
    check->add_option("wasm", wasm_path, "path to a .wasm module")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path);
    if (send->parsed())
        return cmd_send(send_config, workflow_hex, source_fn, target_fn, bytes, seed, mode_name);
    if (check->parsed()) return cmd_check_abi(wasm_path);
    return kExitConfig;
}
