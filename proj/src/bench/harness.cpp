#include "roadrunner/bench/harness.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "roadrunner/abi.hpp"
#include "roadrunner/baseline/serialized.hpp"
#include "roadrunner/checksum.hpp"
#include "roadrunner/runtime/shim.hpp"

namespace rr::bench {

const char* to_string(BenchMode mode) {
    switch (mode) {
    case BenchMode::User: return "user";
    case BenchMode::Kernel: return "kernel";
    case BenchMode::Network: return "network";
    case BenchMode::NetworkFallback: return "network-fallback";
    case BenchMode::Baseline: return "baseline";
    }
    return "?";
}

std::optional<BenchMode> parse_bench_mode(std::string_view name) {
    if (name == "user") return BenchMode::User;
    if (name == "kernel") return BenchMode::Kernel;
    if (name == "network") return BenchMode::Network;
    if (name == "network-fallback") return BenchMode::NetworkFallback;
    if (name == "baseline") return BenchMode::Baseline;
    return std::nullopt;
}

namespace {

using runtime::Config;
using runtime::FunctionRecord;
using runtime::Locality;
using runtime::Shim;

constexpr std::uint32_t kSourceFn = 1;
constexpr std::uint32_t kFirstTargetFn = 2;

// Per-cell seed: identical across modes and trials so every plane moves
// byte-identical payloads.
std::uint64_t cell_seed(std::uint64_t base_seed, std::uint64_t payload) {
    std::uint64_t x = base_seed ^ (payload * 0x9E3779B97F4A7C15ull);
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 33;
    return x | 1;
}

std::uint64_t memory_budget(std::uint64_t payload) {
    return payload + (64ull << 20);
}

struct World {
    BenchMode mode = BenchMode::User;
    std::unique_ptr<Shim> sender;
    std::unique_ptr<Shim> receiver;  // null when the sender hosts the targets
    std::unique_ptr<baseline::BaselineServer> baseline_server;
    std::string socket_dir;
    std::vector<std::uint32_t> target_fns;

    Shim& target_shim() { return receiver ? *receiver : *sender; }

    ~World() {
        if (baseline_server) baseline_server->stop();
        if (sender) sender->stop_listeners();
        if (receiver) receiver->stop_listeners();
        if (!socket_dir.empty()) {
            std::error_code ec;
            std::filesystem::remove_all(socket_dir, ec);
        }
    }
};

WorkflowId bench_workflow() {
    WorkflowId id{};
    for (std::size_t i = 0; i < id.size(); i++) id[i] = std::uint8_t(0xB0 + i);
    return id;
}

Result<std::unique_ptr<World>> build_world(const SweepSpec& spec, BenchMode mode,
                                           std::uint64_t payload, std::uint32_t degree) {
    auto world = std::make_unique<World>();
    world->mode = mode;

    const WorkflowId workflow = bench_workflow();
    static std::atomic<std::uint64_t> world_counter{0};
    world->socket_dir = spec.runtime_dir + "/w" + std::to_string(::getpid()) + "-" +
                        std::to_string(world_counter.fetch_add(1));
    std::error_code ec;
    std::filesystem::create_directories(world->socket_dir, ec);

    for (std::uint32_t i = 0; i < degree; i++) world->target_fns.push_back(kFirstTargetFn + i);

    Config base;
    base.workflow = workflow;
    base.runtime_dir = world->socket_dir;
    base.timeout_ms = spec.timeout_ms;
    base.max_memory = memory_budget(payload);
    base.hose_enabled = mode != BenchMode::NetworkFallback;

    FunctionRecord producer;
    producer.function_id = kSourceFn;
    producer.name = "producer";
    producer.workflow_id = workflow;
    producer.locality = Locality::SameVm;
    producer.wasm_path = spec.producer_wasm;

    auto consumer_record = [&](std::uint32_t fn) {
        FunctionRecord r;
        r.function_id = fn;
        r.name = "consumer" + std::to_string(fn);
        r.workflow_id = workflow;
        r.wasm_path = spec.consumer_wasm;
        return r;
    };

    switch (mode) {
    case BenchMode::User: {
        Config cfg = base;
        cfg.functions.push_back(producer);
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::SameVm;
            cfg.functions.push_back(std::move(r));
        }
        auto shim = Shim::create(cfg);
        if (!shim.ok()) return std::move(shim).error();
        world->sender = std::move(shim).value();
        break;
    }
    case BenchMode::Kernel: {
        Config recv_cfg = base;
        recv_cfg.serve_kernel = true;
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::SameVm;
            recv_cfg.functions.push_back(std::move(r));
        }
        auto receiver = Shim::create(recv_cfg);
        if (!receiver.ok()) return std::move(receiver).error();
        if (auto s = receiver.value()->start_listeners(); !s.ok()) return std::move(s).error();
        world->receiver = std::move(receiver).value();

        Config send_cfg = base;
        send_cfg.functions.push_back(producer);
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::SameHost;
            send_cfg.functions.push_back(std::move(r));
        }
        auto sender = Shim::create(send_cfg);
        if (!sender.ok()) return std::move(sender).error();
        world->sender = std::move(sender).value();
        break;
    }
    case BenchMode::Network:
    case BenchMode::NetworkFallback: {
        Config recv_cfg = base;
        recv_cfg.listen_network = true;
        recv_cfg.listen_host = "127.0.0.1";
        recv_cfg.listen_port = 0;
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::SameVm;
            recv_cfg.functions.push_back(std::move(r));
        }
        auto receiver = Shim::create(recv_cfg);
        if (!receiver.ok()) return std::move(receiver).error();
        if (auto s = receiver.value()->start_listeners(); !s.ok()) return std::move(s).error();
        world->receiver = std::move(receiver).value();
        std::uint16_t port = world->receiver->network_port();

        Config send_cfg = base;
        send_cfg.functions.push_back(producer);
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::Remote;
            r.address_host = "127.0.0.1";
            r.address_port = port;
            send_cfg.functions.push_back(std::move(r));
        }
        auto sender = Shim::create(send_cfg);
        if (!sender.ok()) return std::move(sender).error();
        world->sender = std::move(sender).value();
        break;
    }
    case BenchMode::Baseline: {
        Config recv_cfg = base;
        for (std::uint32_t fn : world->target_fns) {
            auto r = consumer_record(fn);
            r.locality = Locality::SameVm;
            recv_cfg.functions.push_back(std::move(r));
        }
        auto receiver = Shim::create(recv_cfg);
        if (!receiver.ok()) return std::move(receiver).error();
        world->receiver = std::move(receiver).value();

        baseline::BaselineOptions opts;
        opts.timeout = std::chrono::milliseconds(spec.timeout_ms);
        auto server = baseline::BaselineServer::start(
            "127.0.0.1", 0, *world->receiver->sink(world->target_fns.front()), opts);
        if (!server.ok()) return std::move(server).error();
        world->baseline_server = std::move(server).value();

        Config send_cfg = base;
        send_cfg.functions.push_back(producer);
        auto sender = Shim::create(send_cfg);
        if (!sender.ok()) return std::move(sender).error();
        world->sender = std::move(sender).value();
        break;
    }
    }
    return world;
}

struct TrialContext {
    std::uint64_t payload = 0;
    std::uint64_t expected_checksum = 0;
    host::HostCallCapture capture;
};

Result<TrialContext> prepare_payload(World& world, const SweepSpec& spec, std::uint64_t payload) {
    TrialContext ctx;
    ctx.payload = payload;
    std::uint64_t seed = cell_seed(spec.seed, payload);
    auto params = abi::encode_producer_params(seed, payload);
    auto capture = world.sender->stage_and_run(kSourceFn, params);
    if (!capture.ok()) return std::move(capture).error();
    ctx.capture = capture.value();
    if (ctx.capture.region.length != payload) {
        return make_error(ErrorKind::GuestAbiMissing,
                          "producer emitted " + std::to_string(ctx.capture.region.length) +
                              " bytes, expected " + std::to_string(payload));
    }
    auto reference = abi::reference_payload(seed, payload);
    ctx.expected_checksum = checksum64(reference);
    // The staged bytes themselves must already match; catches generator
    // drift before any transfer runs.
    auto staged = world.sender->instance(kSourceFn)->read_memory(ctx.capture.region);
    if (!staged.ok()) return std::move(staged).error();
    if (checksum64(staged.value()) != ctx.expected_checksum) {
        return make_error(ErrorKind::GuestAbiMissing,
                          "producer payload disagrees with the host-side generator");
    }
    return ctx;
}

Result<TransferReport> one_trial(World& world, const TrialContext& ctx, std::uint32_t target_fn,
                                 std::uint64_t trial_index, const SweepSpec& spec) {
    TransferReport report;

    transport::DeliverySink* sink = world.target_shim().sink(target_fn);
    std::uint64_t completed_before = sink->completed_count();

    ResourceSample before = sample_resources();

    if (world.mode == BenchMode::Baseline) {
        using Clock = std::chrono::steady_clock;
        auto t0 = Clock::now();
        baseline::BaselineOptions opts;
        opts.timeout = std::chrono::milliseconds(spec.timeout_ms);
        auto phases = baseline::baseline_transfer(
            "127.0.0.1", world.baseline_server->port(), kSourceFn, target_fn,
            *world.sender->instance(kSourceFn), ctx.capture.region, opts);
        double total = std::chrono::duration<double>(Clock::now() - t0).count();
        if (!phases.ok()) return std::move(phases).error();
        auto server_phases = world.baseline_server->last_phases();
        report.mode = to_string(BenchMode::Baseline);
        report.payload_bytes = ctx.payload;
        report.t_serialize = phases.value().serialize_s;
        report.t_deserialize = server_phases.deserialize_s;
        report.t_transfer =
            std::max(0.0, phases.value().roundtrip_s - server_phases.deserialize_s);
        report.t_locate = std::max(0.0, total - phases.value().serialize_s -
                                            phases.value().roundtrip_s);
        report.t_total = total;
        report.throughput_rps = extrapolate_throughput(total);
    } else {
        runtime::DispatchOptions opts;
        if (world.mode == BenchMode::Kernel) opts.mode_override = runtime::TransferMode::Kernel;
        if (world.mode == BenchMode::Network || world.mode == BenchMode::NetworkFallback)
            opts.mode_override = runtime::TransferMode::Network;
        if (world.mode == BenchMode::NetworkFallback)
            opts.hose_override = transport::HosePreference::Disabled;
        auto outcome = world.sender->dispatch(kSourceFn, target_fn, ctx.capture, opts);
        if (!outcome.status.ok()) return std::move(outcome.status).error();
        report = outcome.report;
        report.mode = to_string(world.mode);  // distinguish forced-fallback runs
    }

    // The window above ends at delivery commit; wait for the consumer's
    // run() so verification reads settled state.
    if (!sink->wait_for_completed(completed_before + 1,
                                  std::chrono::milliseconds(spec.timeout_ms))) {
        return make_error(ErrorKind::Timeout, "delivery did not complete in time");
    }

    auto delivered = sink->last_delivery();
    if (!delivered) {
        return make_error(ErrorKind::Timeout, "no delivery recorded");
    }
    auto bytes = sink->instance().read_memory(*delivered);
    if (!bytes.ok()) return std::move(bytes).error();
    if (checksum64(bytes.value()) != ctx.expected_checksum) {
        return make_error(ErrorKind::BoundsViolation, "payload checksum mismatch after delivery");
    }

    ResourceSample after = sample_resources();
    report.trial = trial_index;
    report.cpu_user_s = after.cpu_user_s - before.cpu_user_s;
    report.cpu_kernel_s = after.cpu_kernel_s - before.cpu_kernel_s;
    report.rss_peak_bytes = after.rss_peak_bytes;
    return report;
}

Status validate_spec(const SweepSpec& spec) {
    if (spec.modes.empty()) {
        return make_error(ErrorKind::RegistryMiss, "no benchmark modes selected");
    }
    if (spec.payload_sizes.empty()) {
        return make_error(ErrorKind::RegistryMiss, "no payload sizes selected");
    }
    if (spec.trials < 1) {
        return make_error(ErrorKind::RegistryMiss, "trials must be >= 1");
    }
    for (std::size_t i = 1; i < spec.payload_sizes.size(); i++) {
        if (spec.payload_sizes[i] < spec.payload_sizes[i - 1]) {
            return make_error(ErrorKind::RegistryMiss, "payload sizes must ascend");
        }
    }
    if (spec.producer_wasm.empty() || spec.consumer_wasm.empty()) {
        return make_error(ErrorKind::RegistryMiss, "producer/consumer guest paths required");
    }
    return ok_status();
}

}  // namespace

Result<std::vector<TransferReport>> run_sequence(const SweepSpec& spec) {
    if (auto s = validate_spec(spec); !s.ok()) return std::move(s).error();

    std::vector<TransferReport> reports;
    for (BenchMode mode : spec.modes) {
        for (std::uint64_t payload : spec.payload_sizes) {
            auto world = build_world(spec, mode, payload, 1);
            if (!world.ok()) return std::move(world).error();
            auto ctx = prepare_payload(*world.value(), spec, payload);
            if (!ctx.ok()) return std::move(ctx).error();

            auto fail_at = [&](std::uint32_t trial, const TransferError& err) {
                return make_error(err.kind, std::string("mode ") + to_string(mode) + ", size " +
                                                std::to_string(payload) + ", trial " +
                                                std::to_string(trial) + ": " + err.detail);
            };

            for (std::uint32_t w = 0; w < spec.warmup; w++) {
                auto r = one_trial(*world.value(), ctx.value(), kFirstTargetFn, w, spec);
                if (!r.ok()) return fail_at(w, r.error());
            }
            for (std::uint32_t t = 0; t < spec.trials; t++) {
                auto r = one_trial(*world.value(), ctx.value(), kFirstTargetFn, t, spec);
                if (!r.ok()) return fail_at(t, r.error());
                reports.push_back(std::move(r).value());
            }
        }
    }
    return reports;
}

Result<std::vector<TransferReport>> run_fanout(const SweepSpec& spec, std::uint32_t degree) {
    if (auto s = validate_spec(spec); !s.ok()) return std::move(s).error();
    if (degree < 1) {
        return make_error(ErrorKind::RegistryMiss, "fanout degree must be >= 1");
    }

    std::vector<TransferReport> reports;
    for (BenchMode mode : spec.modes) {
        if (mode == BenchMode::Baseline) {
            return make_error(ErrorKind::RegistryMiss, "fanout is not defined for the baseline");
        }
        for (std::uint64_t payload : spec.payload_sizes) {
            auto world = build_world(spec, mode, payload, degree);
            if (!world.ok()) return std::move(world).error();
            World& w = *world.value();
            auto ctx = prepare_payload(w, spec, payload);
            if (!ctx.ok()) return std::move(ctx).error();

            std::uint32_t pool = std::min<std::uint32_t>(
                degree, std::max(1u, std::thread::hardware_concurrency()));

            for (std::uint32_t t = 0; t < spec.warmup + spec.trials; t++) {
                bool warm = t < spec.warmup;
                std::vector<Result<TransferReport>> results(
                    degree, Result<TransferReport>(TransferReport{}));
                std::atomic<std::uint32_t> next{0};
                std::vector<std::thread> workers;
                for (std::uint32_t p = 0; p < pool; p++) {
                    workers.emplace_back([&] {
                        for (;;) {
                            std::uint32_t i = next.fetch_add(1);
                            if (i >= degree) return;
                            results[i] = one_trial(w, ctx.value(), kFirstTargetFn + i,
                                                   t - (warm ? 0 : spec.warmup), spec);
                        }
                    });
                }
                for (auto& th : workers) th.join();
                for (std::uint32_t i = 0; i < degree; i++) {
                    if (!results[i].ok()) {
                        const TransferError& err = results[i].error();
                        return make_error(err.kind,
                                          std::string("fanout mode ") + to_string(mode) +
                                              ", size " + std::to_string(payload) + ", degree " +
                                              std::to_string(degree) + ", target " +
                                              std::to_string(kFirstTargetFn + i) + ": " +
                                              err.detail);
                    }
                    if (!warm) reports.push_back(std::move(results[i]).value());
                }
            }
        }
    }
    return reports;
}

}  // namespace rr::bench
