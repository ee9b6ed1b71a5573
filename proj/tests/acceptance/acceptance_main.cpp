// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any fail. Performance criteria compare planes against the in-repo
// serialized baseline on loopback at desk scale.

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "roadrunner/abi.hpp"
#include "roadrunner/bench/harness.hpp"
#include "roadrunner/checksum.hpp"
#include "roadrunner/frame.hpp"
#include "roadrunner/host/instance.hpp"
#include "roadrunner/net/socket.hpp"
#include "roadrunner/transport/hose.hpp"
#include "roadrunner/transport/network.hpp"

using namespace rr;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(int criterion, const char* name, const Verdict& v) {
    std::printf("%s: criterion %d (%s)%s%s\n", v.pass ? "PASS" : "FAIL", criterion, name,
                v.detail.empty() ? "" : " - ", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) g_failures++;
}

std::string guests_dir;

bench::SweepSpec base_spec() {
    bench::SweepSpec spec;
    spec.producer_wasm = guests_dir + "/producer.wasm";
    spec.consumer_wasm = guests_dir + "/consumer.wasm";
    spec.runtime_dir = "/tmp/rr-acceptance";
    spec.seed = 20240601;
    return spec;
}

double mean_t_total(const std::vector<bench::TransferReport>& reports, const std::string& mode,
                    std::uint64_t size) {
    double sum = 0;
    int n = 0;
    for (const auto& r : reports) {
        if (r.mode == mode && r.payload_bytes == size) {
            sum += r.t_total;
            n++;
        }
    }
    return n ? sum / n : 0;
}

double mean_phase_share(const std::vector<bench::TransferReport>& reports,
                        const std::string& mode, std::uint64_t size) {
    double share_sum = 0;
    int n = 0;
    for (const auto& r : reports) {
        if (r.mode == mode && r.payload_bytes == size && r.t_total > 0) {
            share_sum += (r.t_serialize + r.t_deserialize) / r.t_total;
            n++;
        }
    }
    return n ? share_sum / n : 0;
}

// Criteria 1 and 5 share one integrity sweep; criterion 2's structural
// half reads the same reports.
std::vector<bench::TransferReport> g_integrity_reports;

Verdict criterion1_integrity() {
    bench::SweepSpec spec = base_spec();
    spec.modes = {bench::BenchMode::User, bench::BenchMode::Kernel, bench::BenchMode::Network,
                  bench::BenchMode::NetworkFallback, bench::BenchMode::Baseline};
    spec.payload_sizes = {1, 1024, 64 * 1024, 1 << 20, 10 << 20, 100 << 20};
    spec.trials = 10;
    spec.warmup = 0;

    auto reports = bench::run_sequence(spec);
    if (!reports.ok()) {
        return {false, "sweep aborted: " + reports.error().to_string()};
    }
    g_integrity_reports = std::move(reports).value();
    std::size_t expected = spec.modes.size() * spec.payload_sizes.size() * spec.trials;
    if (g_integrity_reports.size() != expected) {
        return {false, "expected " + std::to_string(expected) + " verified trials, got " +
                           std::to_string(g_integrity_reports.size())};
    }
    return {true, std::to_string(expected) + " trials checksum-verified across 5 modes x 6 sizes"};
}

Verdict criterion2_serialization_freedom() {
    if (g_integrity_reports.empty()) return {false, "integrity sweep unavailable"};
    for (const auto& r : g_integrity_reports) {
        if (r.mode != "baseline" && (r.t_serialize != 0 || r.t_deserialize != 0)) {
            return {false, "mode " + r.mode + " reported a serialization phase"};
        }
    }
    double share = mean_phase_share(g_integrity_reports, "baseline", 100 << 20);
    char buf[128];
    std::snprintf(buf, sizeof buf, "planes structurally 0; baseline share %.1f%% at 100 MiB",
                  share * 100);
    if (share < 0.10) {
        return {false, std::string(buf) + " (< 10%)"};
    }
    return {true, buf};
}

std::vector<bench::TransferReport> g_timed_reports;

Verdict criterion3_relative_latency() {
    bench::SweepSpec spec = base_spec();
    spec.modes = {bench::BenchMode::User, bench::BenchMode::Kernel, bench::BenchMode::Network,
                  bench::BenchMode::Baseline};
    spec.payload_sizes = {1 << 20, 10 << 20, 100 << 20};
    spec.trials = 10;
    spec.warmup = 2;

    auto reports = bench::run_sequence(spec);
    if (!reports.ok()) {
        return {false, "timed sweep aborted: " + reports.error().to_string()};
    }
    g_timed_reports = std::move(reports).value();

    std::string detail;
    bool pass = true;
    for (std::uint64_t size : {std::uint64_t(1 << 20), std::uint64_t(10 << 20),
                               std::uint64_t(100 << 20)}) {
        double user = mean_t_total(g_timed_reports, "user", size);
        double baseline = mean_t_total(g_timed_reports, "baseline", size);
        double ratio = baseline > 0 ? user / baseline : 1e9;
        char buf[96];
        std::snprintf(buf, sizeof buf, " user/baseline@%lluMiB=%.3f",
                      (unsigned long long)(size >> 20), ratio);
        detail += buf;
        if (ratio > 0.6) pass = false;
    }
    for (std::uint64_t size : {std::uint64_t(10 << 20), std::uint64_t(100 << 20)}) {
        double kernel = mean_t_total(g_timed_reports, "kernel", size);
        double baseline = mean_t_total(g_timed_reports, "baseline", size);
        double ratio = baseline > 0 ? kernel / baseline : 1e9;
        char buf[96];
        std::snprintf(buf, sizeof buf, " kernel/baseline@%lluMiB=%.3f",
                      (unsigned long long)(size >> 20), ratio);
        detail += buf;
        if (ratio > 0.9) pass = false;
    }
    return {pass, detail};
}

Verdict criterion4_plane_ordering() {
    if (g_timed_reports.empty()) return {false, "timed sweep unavailable"};
    const std::uint64_t size = 10 << 20;
    double user = mean_t_total(g_timed_reports, "user", size);
    double kernel = mean_t_total(g_timed_reports, "kernel", size);
    double network = mean_t_total(g_timed_reports, "network", size);
    char buf[160];
    std::snprintf(buf, sizeof buf, "at 10 MiB: user=%.6fs kernel=%.6fs network=%.6fs", user,
                  kernel, network);
    bool pass = user < kernel && kernel < network;
    return {pass, buf};
}

Verdict criterion5_differential() {
    if (g_integrity_reports.empty()) return {false, "integrity sweep unavailable"};
    // Correctness equivalence is the gate (both variants passed the
    // checksum sweep); the timing difference is reported, not thresholded.
    std::string detail = transport::hose_capability().available
                             ? "hose active on the network plane;"
                             : "hose unavailable on this kernel (fallback on both sides);";
    for (std::uint64_t size : {std::uint64_t(1), std::uint64_t(1024), std::uint64_t(64 * 1024),
                               std::uint64_t(1 << 20), std::uint64_t(10 << 20),
                               std::uint64_t(100 << 20)}) {
        double zc = mean_t_total(g_integrity_reports, "network", size);
        double fb = mean_t_total(g_integrity_reports, "network-fallback", size);
        if (zc == 0 || fb == 0) return {false, "missing network reports"};
        char buf[96];
        std::snprintf(buf, sizeof buf, " d@%llu=%+.6fs", (unsigned long long)size, zc - fb);
        detail += buf;
    }
    return {true, detail};
}

Verdict criterion6_property_suites() {
    // Frame codec round trip, 1000 randomized headers.
    {
        std::mt19937_64 rng(2024);
        for (int i = 0; i < 1000; i++) {
            FrameHeader h;
            h.msg_type = MsgType(1 + rng() % 4);
            h.flags = std::uint16_t(rng() & 1);
            for (auto& b : h.workflow_id) b = std::uint8_t(rng());
            h.source_fn = std::uint32_t(rng());
            h.target_fn = std::uint32_t(rng());
            h.payload_len = rng();
            auto decoded = decode_frame_header(encode_frame_header(h));
            if (!decoded.ok() || !(decoded.value() == h)) {
                return {false, "frame codec round trip failed"};
            }
        }
    }

    // Memory round trip and bounds totality, >= 10^4 randomized cases.
    {
        auto inst = host::Instance::instantiate_file(guests_dir + "/echo.wasm",
                                                     host::InstanceLimits{64 << 20});
        if (!inst.ok()) return {false, inst.error().to_string()};
        auto& echo = *inst.value();
        std::mt19937_64 rng(4048);

        for (int i = 0; i < 200; i++) {
            std::uint64_t len = 1 + rng() % 4096;
            auto region = echo.guest_alloc(len);
            if (!region.ok()) return {false, "alloc failed in round-trip property"};
            std::vector<std::uint8_t> data(static_cast<std::size_t>(len));
            for (auto& b : data) b = std::uint8_t(rng());
            if (!echo.write_memory(data, region.value().offset).ok())
                return {false, "write failed in round-trip property"};
            auto back = echo.read_memory(region.value());
            if (!back.ok() || back.value() != data)
                return {false, "memory round trip mismatch"};
            if (!echo.guest_dealloc(region.value()).ok())
                return {false, "dealloc failed in round-trip property"};
        }

        std::uint64_t size = echo.memory_size();
        auto whole_before = echo.read_memory(MemoryRegion{0, size});
        std::uint64_t sum_before = checksum64(whole_before.value().data(),
                                              whole_before.value().size());
        for (int i = 0; i < 10000; i++) {
            std::uint32_t offset = std::uint32_t(rng() % (size + 512));
            std::uint64_t over = size - std::min<std::uint64_t>(offset, size) + 1;
            MemoryRegion bad{offset, over + rng() % 1024};
            auto r = echo.read_memory(bad);
            if (r.ok() || r.error().kind != ErrorKind::BoundsViolation) {
                return {false, "out-of-range read not rejected"};
            }
            std::vector<std::uint8_t> junk(16, 0xEE);
            if (echo.write_memory(junk, std::uint32_t(size - 8)).ok()) {
                return {false, "boundary-crossing write not rejected"};
            }
        }
        auto whole_after = echo.read_memory(MemoryRegion{0, size});
        if (checksum64(whole_after.value().data(), whole_after.value().size()) != sum_before) {
            return {false, "rejected accesses mutated memory"};
        }

        // Isolation: a second instance is unaffected by traffic on the first.
        auto other = host::Instance::instantiate_file(guests_dir + "/consumer.wasm",
                                                      host::InstanceLimits{64 << 20});
        if (!other.ok()) return {false, other.error().to_string()};
        auto other_before = other.value()->read_memory(MemoryRegion{0, other.value()->memory_size()});
        std::uint64_t other_sum = checksum64(other_before.value().data(),
                                             other_before.value().size());
        for (int i = 0; i < 30; i++) {
            auto region = echo.guest_alloc(1 + rng() % 8192);
            if (!region.ok()) return {false, "alloc failed in isolation property"};
            std::vector<std::uint8_t> data(std::size_t(region.value().length), 0x77);
            (void)echo.write_memory(data, region.value().offset);
            (void)echo.write_mailbox(region.value());
            (void)echo.invoke("run", {});
            echo.take_captures();
        }
        auto other_after = other.value()->read_memory(MemoryRegion{0, other.value()->memory_size()});
        if (checksum64(other_after.value().data(), other_after.value().size()) != other_sum) {
            return {false, "cross-instance interference detected"};
        }
    }

    // Hose chunk-boundary sweep over the network plane: payload lengths
    // congruent to 0, 1 and capacity-1 modulo the hose capacity.
    {
        auto hose = transport::DataHose::create();
        if (!hose.ok()) return {false, "cannot create a hose"};
        const std::uint64_t cap = hose.value().capacity();

        auto consumer = host::Instance::instantiate_file(guests_dir + "/consumer.wasm",
                                                         host::InstanceLimits{64 << 20});
        auto echo = host::Instance::instantiate_file(guests_dir + "/echo.wasm",
                                                     host::InstanceLimits{64 << 20});
        if (!consumer.ok() || !echo.ok()) return {false, "instances for boundary sweep failed"};
        transport::DeliverySink sink(*consumer.value(), false);
        transport::NetworkOptions opts;
        opts.transport.ack_timeout = std::chrono::milliseconds(10000);
        auto server = transport::NetworkServer::start("127.0.0.1", 0, sink, opts);
        if (!server.ok()) return {false, "boundary sweep listener failed"};
        transport::NetworkClient client(opts);
        transport::PeerAddress peer{"127.0.0.1", server.value()->port(), 2};

        std::uint64_t completed = 0;
        for (std::uint64_t n :
             {cap, 2 * cap, cap + 1, 2 * cap + 1, cap - 1, 2 * cap - 1}) {
            auto payload = abi::reference_payload(n, n);
            auto region = echo.value()->guest_alloc(n);
            if (!region.ok()) return {false, "alloc failed in boundary sweep"};
            (void)echo.value()->write_memory(payload, region.value().offset);
            FrameHeader header;
            header.msg_type = MsgType::Data;
            header.source_fn = 1;
            header.target_fn = 2;
            header.payload_len = n;
            auto outcome = client.send(peer, header, *echo.value(), region.value());
            if (!outcome.ok()) return {false, "boundary send failed at n=" + std::to_string(n)};
            completed++;
            if (!sink.wait_for_completed(completed, std::chrono::milliseconds(10000))) {
                return {false, "boundary delivery incomplete at n=" + std::to_string(n)};
            }
            auto delivered = consumer.value()->read_memory(*sink.last_delivery());
            if (!delivered.ok() || delivered.value() != payload) {
                return {false, "boundary payload mismatch at n=" + std::to_string(n)};
            }
            (void)consumer.value()->guest_dealloc(*sink.last_delivery());
            (void)echo.value()->guest_dealloc(region.value());
        }

        // Descriptor hygiene over a 100-transfer burst on one connection.
        auto payload = abi::reference_payload(17, 2048);
        auto region = echo.value()->guest_alloc(2048);
        (void)echo.value()->write_memory(payload, region.value().offset);
        FrameHeader header;
        header.msg_type = MsgType::Data;
        header.source_fn = 1;
        header.target_fn = 2;
        header.payload_len = 2048;
        if (!client.send(peer, header, *echo.value(), region.value()).ok()) {
            return {false, "burst priming send failed"};
        }
        completed++;
        int fds_before = net::open_fd_count();
        for (int i = 0; i < 100; i++) {
            if (!client.send(peer, header, *echo.value(), region.value()).ok()) {
                return {false, "burst send failed"};
            }
            completed++;
        }
        if (!sink.wait_for_completed(completed, std::chrono::milliseconds(30000))) {
            return {false, "burst deliveries incomplete"};
        }
        int fds_after = net::open_fd_count();
        if (fds_before != fds_after) {
            return {false, "descriptor census drifted: " + std::to_string(fds_before) + " -> " +
                               std::to_string(fds_after)};
        }
    }

    return {true, "codec round trip, memory properties, boundary sweep, descriptor census"};
}

Verdict criterion7_fanout() {
    bench::SweepSpec spec = base_spec();
    spec.modes = {bench::BenchMode::User};
    spec.payload_sizes = {1 << 20};
    spec.trials = 10;
    spec.warmup = 2;

    auto d1 = bench::run_fanout(spec, 1);
    if (!d1.ok()) return {false, "degree-1 fanout failed: " + d1.error().to_string()};
    auto d50 = bench::run_fanout(spec, 50);
    if (!d50.ok()) return {false, "degree-50 fanout failed: " + d50.error().to_string()};

    auto mean_of = [](const std::vector<bench::TransferReport>& rs) {
        double sum = 0;
        for (const auto& r : rs) sum += r.t_total;
        return rs.empty() ? 0.0 : sum / double(rs.size());
    };
    double m1 = mean_of(d1.value());
    double m50 = mean_of(d50.value());
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "per-transfer mean: degree1=%.6fs degree50=%.6fs ratio=%.2f", m1, m50,
                  m1 > 0 ? m50 / m1 : 0.0);
    return {m50 <= 3 * m1, buf};
}

Verdict criterion8_abi() {
    for (const char* name : {"echo.wasm", "producer.wasm", "consumer.wasm"}) {
        auto report = abi::check_file(guests_dir + "/" + name);
        if (!report.ok()) return {false, std::string(name) + ": " + report.error().to_string()};
        if (!report.value().conformant) {
            return {false, std::string(name) + " unexpectedly non-conformant"};
        }
    }
    auto broken = abi::check_file(guests_dir + "/broken.wasm");
    if (!broken.ok()) return {false, "broken.wasm: " + broken.error().to_string()};
    if (broken.value().conformant) {
        return {false, "broken.wasm unexpectedly conformant"};
    }
    bool names_export = false;
    for (const auto& p : broken.value().problems) {
        if (p.find("allocate_memory") != std::string::npos) names_export = true;
    }
    if (!names_export) return {false, "missing-export report does not name allocate_memory"};

    auto inst = host::Instance::instantiate_file(guests_dir + "/broken.wasm",
                                                 host::InstanceLimits{16 << 20});
    if (inst.ok() || inst.error().kind != ErrorKind::GuestAbiMissing) {
        return {false, "instantiating the mutated guest did not fail with GuestAbiMissing"};
    }
    return {true, "3 guests conformant; mutated guest rejected with GuestAbiMissing"};
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    guests_dir = argc > 1 ? argv[1] : RR_GUESTS_DIR;

    const auto& hose = transport::hose_capability();
    std::printf("zero-copy hose: %s%s%s\n", hose.available ? "available" : "unavailable",
                hose.available ? "" : " - ", hose.available ? "" : hose.detail.c_str());

    report(1, "integrity sweep", criterion1_integrity());
    report(2, "serialization freedom", criterion2_serialization_freedom());
    report(3, "relative latency", criterion3_relative_latency());
    report(4, "plane ordering", criterion4_plane_ordering());
    report(5, "zero-copy/fallback differential", criterion5_differential());
    report(6, "property suites", criterion6_property_suites());
    report(7, "fanout scalability", criterion7_fanout());
    report(8, "guest contract conformance", criterion8_abi());

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
