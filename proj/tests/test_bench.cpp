#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roadrunner/bench/harness.hpp"
#include "guest_util.hpp"

using namespace rr;
using namespace rr::bench;

namespace {

SweepSpec small_spec() {
    SweepSpec spec;
    spec.producer_wasm = guestutil::guest_path("producer.wasm");
    spec.consumer_wasm = guestutil::guest_path("consumer.wasm");
    spec.runtime_dir = "/tmp/rr-test-bench";
    spec.trials = 3;
    spec.warmup = 1;
    spec.seed = 1234;
    return spec;
}

// Independent CSV re-parser: nothing shared with the production emitter.
struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

ParsedCsv parse_csv(const std::string& path) {
    ParsedCsv out;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (first) {
            out.header = fields;
            first = false;
        } else {
            out.rows.push_back(fields);
        }
    }
    return out;
}

double to_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("small sweep across all planes produces verified reports") {
    SweepSpec spec = small_spec();
    spec.modes = {BenchMode::User, BenchMode::Kernel, BenchMode::Network,
                  BenchMode::NetworkFallback, BenchMode::Baseline};
    spec.payload_sizes = {1024};

    auto reports = run_sequence(spec);
    REQUIRE_MESSAGE(reports.ok(), (reports.ok() ? "" : reports.error().to_string()));
    CHECK(reports.value().size() == 5 * 3);

    for (const TransferReport& r : reports.value()) {
        CHECK(r.payload_bytes == 1024);
        CHECK(r.t_total > 0);
        CHECK(r.throughput_rps == doctest::Approx(1.0 / r.t_total).epsilon(1e-9));
        if (r.mode == "baseline") {
            CHECK(r.t_serialize > 0);
            CHECK(r.t_deserialize > 0);
            // Phase accounting: no unattributed time beyond 5%.
            double accounted = r.t_locate + r.t_serialize + r.t_transfer + r.t_deserialize;
            CHECK(std::abs(r.t_total - accounted) <= 0.05 * r.t_total + 1e-6);
        } else {
            CHECK(r.t_serialize == 0);
            CHECK(r.t_deserialize == 0);
            CHECK(r.t_total >= (r.t_locate + r.t_transfer) * 0.95 - 1e-9);
        }
    }
}

TEST_CASE("csv emit, independent re-parse and re-summarize") {
    SweepSpec spec = small_spec();
    spec.modes = {BenchMode::User};
    spec.payload_sizes = {512, 2048};
    spec.trials = 10;
    spec.warmup = 0;

    auto reports = run_sequence(spec);
    REQUIRE(reports.ok());
    REQUIRE(reports.value().size() == 20);

    std::string path = "/tmp/rr-test-bench-report.csv";
    REQUIRE(emit_report(reports.value(), path).ok());

    auto csv = parse_csv(path);
    CHECK(csv.header ==
          std::vector<std::string>{"mode", "payload_bytes", "trial", "t_locate", "t_serialize",
                                   "t_transfer", "t_deserialize", "t_total", "throughput_rps",
                                   "cpu_user_s", "cpu_kernel_s", "rss_peak_bytes"});
    REQUIRE(csv.rows.size() == 20);  // 10 trials x 2 sizes

    // Recompute the summary from the raw rows and compare to the emitted
    // summary file at 1e-9 relative tolerance.
    struct Agg {
        double sum = 0, sum_sq = 0;
        int n = 0;
    };
    std::map<std::string, Agg> agg;
    for (const auto& row : csv.rows) {
        double t_total = to_double(row[7]);
        auto& a = agg[row[0] + "," + row[1]];
        a.sum += t_total;
        a.sum_sq += t_total * t_total;
        a.n++;
    }

    auto summary = parse_csv(path + ".summary.csv");
    REQUIRE(summary.rows.size() == 2);
    for (const auto& row : summary.rows) {
        const Agg& a = agg.at(row[0] + "," + row[1]);
        REQUIRE(a.n == std::stoi(row[2]));
        double mean = a.sum / a.n;
        double var = a.sum_sq / a.n - mean * mean;
        double stddev = var > 0 ? std::sqrt(var) : 0;
        CHECK(to_double(row[3]) == doctest::Approx(mean).epsilon(1e-9));
        CHECK(to_double(row[4]) == doctest::Approx(stddev).epsilon(1e-9).scale(1e-12));
    }
}

TEST_CASE("summary of a constant column is the constant") {
    std::vector<TransferReport> reports;
    for (int i = 0; i < 5; i++) {
        TransferReport r;
        r.mode = "user";
        r.payload_bytes = 64;
        r.trial = std::uint64_t(i);
        r.t_total = 0.25;
        r.throughput_rps = 4.0;
        reports.push_back(r);
    }
    auto rows = summarize(reports);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_t_total == doctest::Approx(0.25));
    CHECK(rows[0].stddev_t_total == doctest::Approx(0.0));
    CHECK(rows[0].mean_throughput_rps == doctest::Approx(4.0));
}

TEST_CASE("empty report set is refused") {
    CHECK(!emit_report({}, "/tmp/rr-test-empty.csv").ok());
}

TEST_CASE("fanout: degree 3 delivers everywhere with per-target reports") {
    SweepSpec spec = small_spec();
    spec.modes = {BenchMode::User};
    spec.payload_sizes = {4096};
    spec.trials = 2;
    spec.warmup = 1;

    auto reports = run_fanout(spec, 3);
    REQUIRE_MESSAGE(reports.ok(), (reports.ok() ? "" : reports.error().to_string()));
    CHECK(reports.value().size() == 2 * 3);
    for (const auto& r : reports.value()) {
        CHECK(r.mode == "user");
        CHECK(r.payload_bytes == 4096);
        CHECK(r.t_total > 0);
    }
}

TEST_CASE("fanout of degree 1 matches a sequence trial's shape") {
    SweepSpec spec = small_spec();
    spec.modes = {BenchMode::User};
    spec.payload_sizes = {4096};
    spec.trials = 2;
    spec.warmup = 0;
    auto fan = run_fanout(spec, 1);
    REQUIRE(fan.ok());
    CHECK(fan.value().size() == 2);
    auto seq = run_sequence(spec);
    REQUIRE(seq.ok());
    CHECK(seq.value().size() == 2);
    // Same workload shape; both went through the same verification.
    CHECK(fan.value()[0].payload_bytes == seq.value()[0].payload_bytes);
}

TEST_CASE("workload determinism: same seed, same bytes across runs") {
    SweepSpec spec = small_spec();
    spec.modes = {BenchMode::User};
    spec.payload_sizes = {1 << 16};
    spec.trials = 1;
    spec.warmup = 0;
    // The harness verifies every delivery against the seed-derived oracle,
    // so two runs succeeding proves both moved the same reference bytes.
    REQUIRE(run_sequence(spec).ok());
    REQUIRE(run_sequence(spec).ok());
}

TEST_CASE("spec validation") {
    SweepSpec spec = small_spec();
    spec.modes = {};
    spec.payload_sizes = {1};
    CHECK(!run_sequence(spec).ok());

    spec = small_spec();
    spec.modes = {BenchMode::User};
    spec.payload_sizes = {2048, 512};  // must ascend
    CHECK(!run_sequence(spec).ok());

    spec = small_spec();
    spec.modes = {BenchMode::Baseline};
    spec.payload_sizes = {512};
    CHECK(!run_fanout(spec, 2).ok());  // baseline has no fanout
}

}  // TEST_SUITE
