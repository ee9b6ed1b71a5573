#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"

namespace rr::bench {

// One measured transfer. Phase semantics: t_locate covers route resolution
// and capture validation; t_transfer covers byte movement through delivery
// commit (allocation, landing the bytes, mailbox, acknowledgement); the
// serialize/deserialize phases exist only on the baseline path and are
// zero by construction elsewhere. Target-side consumption (run()) happens
// after the measured window, so totals compare what moved the bytes.
struct TransferReport {
    std::string mode;
    std::uint64_t payload_bytes = 0;
    std::uint64_t trial = 0;
    double t_locate = 0;
    double t_serialize = 0;
    double t_transfer = 0;
    double t_deserialize = 0;
    double t_total = 0;
    double throughput_rps = 0;
    double cpu_user_s = 0;
    double cpu_kernel_s = 0;
    std::uint64_t rss_peak_bytes = 0;
};

// Sub-second transfers extrapolate throughput to a one-second window.
double extrapolate_throughput(double t_total_s);

struct ResourceSample {
    double cpu_user_s = 0;
    double cpu_kernel_s = 0;
    std::uint64_t rss_peak_bytes = 0;
};

ResourceSample sample_resources();

struct SummaryRow {
    std::string mode;
    std::uint64_t payload_bytes = 0;
    std::uint64_t trials = 0;
    double mean_t_total = 0;
    double stddev_t_total = 0;
    double mean_throughput_rps = 0;
    double mean_t_serialize = 0;
    double mean_t_deserialize = 0;
    double mean_t_transfer = 0;
    double mean_t_locate = 0;
};

std::vector<SummaryRow> summarize(const std::vector<TransferReport>& reports);

// CSV schema, one row per trial:
//   mode,payload_bytes,trial,t_locate,t_serialize,t_transfer,t_deserialize,
//   t_total,throughput_rps,cpu_user_s,cpu_kernel_s,rss_peak_bytes
// A companion <path>.summary.csv holds per-(mode,size) aggregates; its
// header comments document the measurement method.
Status emit_report(const std::vector<TransferReport>& reports, const std::string& path);

std::string report_csv_header();
std::string report_csv_row(const TransferReport& report);

}  // namespace rr::bench
