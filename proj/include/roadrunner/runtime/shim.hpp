#pragma once

#include <memory>
#include <optional>

#include "roadrunner/bench/report.hpp"
#include "roadrunner/host/instance.hpp"
#include "roadrunner/runtime/registry.hpp"
#include "roadrunner/transport/delivery.hpp"
#include "roadrunner/transport/kernel.hpp"
#include "roadrunner/transport/network.hpp"

namespace rr::runtime {

struct DispatchOptions {
    // Benchmark override: force a plane regardless of the target's
    // declared placement. Kernel endpoints derive from the runtime-dir
    // layout; Network requires an address on the record.
    std::optional<TransferMode> mode_override;
    std::optional<transport::HosePreference> hose_override;
};

// Every dispatch produces exactly one report, success or not. The measured
// window ends at delivery commit (mailbox written / ACK received); the
// target's run() executes after the window.
struct DispatchOutcome {
    bench::TransferReport report;
    Status status = ok_status();
    std::optional<MemoryRegion> delivered;  // user plane: region in the target
    bool zero_copy = false;                 // network plane: hose path taken
};

// The sidecar core: instantiates the locally-hosted guests, owns their
// delivery sinks, serves the configured listeners and routes captures to
// the plane matching the target's placement.
class Shim {
public:
    static Result<std::unique_ptr<Shim>> create(const Config& config);
    ~Shim();
    Shim(const Shim&) = delete;
    Shim& operator=(const Shim&) = delete;

    const Config& config() const;
    const Registry& registry() const;

    host::Instance* instance(std::uint32_t function_id);
    transport::DeliverySink* sink(std::uint32_t function_id);

    // Kernel listeners for local functions (when serve_kernel) and the
    // network listener (when listen_network). Failures name the endpoint.
    Status start_listeners();
    void stop_listeners();
    std::uint16_t network_port() const;  // 0 when no network listener

    DispatchOutcome dispatch(std::uint32_t source_fn, std::uint32_t target_fn,
                             const host::HostCallCapture& capture,
                             const DispatchOptions& options = {});

    // Stages `payload` into the source instance and invokes `run()`; the
    // first capture the guest emits is returned, ready for dispatch.
    Result<host::HostCallCapture> stage_and_run(std::uint32_t function_id,
                                                std::span<const std::uint8_t> payload);

private:
    Shim();
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rr::runtime
