#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roadrunner/bench/report.hpp"
#include "roadrunner/error.hpp"

namespace rr::bench {

// Benchmark planes. Network runs the hose when the platform supports it;
// NetworkFallback forces the buffered path so the two can be compared on
// identical topology.
enum class BenchMode { User, Kernel, Network, NetworkFallback, Baseline };

const char* to_string(BenchMode mode);
std::optional<BenchMode> parse_bench_mode(std::string_view name);

struct SweepSpec {
    std::vector<BenchMode> modes;
    std::vector<std::uint64_t> payload_sizes;  // ascending
    std::uint32_t trials = 10;
    std::uint32_t warmup = 2;
    std::uint64_t seed = 1;
    std::string producer_wasm;
    std::string consumer_wasm;
    // Working directory for host-local sockets; a fresh subdirectory is
    // created per run.
    std::string runtime_dir = "/tmp/roadrunner-bench";
    std::uint64_t timeout_ms = 30000;
};

// Chained producer -> consumer transfers, serially, one payload generation
// per (mode, size) cell. Every trial's delivery is checksum-verified
// against the host-side generator oracle before its report counts; the
// first mismatch aborts the sweep naming (mode, size, trial).
Result<std::vector<TransferReport>> run_sequence(const SweepSpec& spec);

// One source fanning the same payload out to `degree` targets per trial.
// Dispatches run concurrently on a pool bounded by the hardware thread
// count; each transfer's window is measured from its own dispatch start.
Result<std::vector<TransferReport>> run_fanout(const SweepSpec& spec, std::uint32_t degree);

}  // namespace rr::bench
