#include "roadrunner/bench/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sys/resource.h>

namespace rr::bench {

double extrapolate_throughput(double t_total_s) {
    if (t_total_s <= 0) return 0;
    return 1.0 / t_total_s;
}

ResourceSample sample_resources() {
    struct rusage ru{};
    ::getrusage(RUSAGE_SELF, &ru);
    ResourceSample s;
    s.cpu_user_s = double(ru.ru_utime.tv_sec) + double(ru.ru_utime.tv_usec) / 1e6;
    s.cpu_kernel_s = double(ru.ru_stime.tv_sec) + double(ru.ru_stime.tv_usec) / 1e6;
    s.rss_peak_bytes = std::uint64_t(ru.ru_maxrss) * 1024;  // Linux reports KiB
    return s;
}

std::vector<SummaryRow> summarize(const std::vector<TransferReport>& reports) {
    std::map<std::pair<std::string, std::uint64_t>, std::vector<const TransferReport*>> groups;
    for (const TransferReport& r : reports) {
        groups[{r.mode, r.payload_bytes}].push_back(&r);
    }
    std::vector<SummaryRow> rows;
    for (const auto& [key, group] : groups) {
        SummaryRow row;
        row.mode = key.first;
        row.payload_bytes = key.second;
        row.trials = group.size();
        double sum = 0, sum_sq = 0;
        for (const TransferReport* r : group) {
            sum += r->t_total;
            sum_sq += r->t_total * r->t_total;
            row.mean_throughput_rps += r->throughput_rps;
            row.mean_t_serialize += r->t_serialize;
            row.mean_t_deserialize += r->t_deserialize;
            row.mean_t_transfer += r->t_transfer;
            row.mean_t_locate += r->t_locate;
        }
        double n = double(group.size());
        row.mean_t_total = sum / n;
        double variance = sum_sq / n - row.mean_t_total * row.mean_t_total;
        row.stddev_t_total = variance > 0 ? std::sqrt(variance) : 0;
        row.mean_throughput_rps /= n;
        row.mean_t_serialize /= n;
        row.mean_t_deserialize /= n;
        row.mean_t_transfer /= n;
        row.mean_t_locate /= n;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);  // round-trip exact
    return buf;
}

}  // namespace

std::string report_csv_header() {
    return "mode,payload_bytes,trial,t_locate,t_serialize,t_transfer,t_deserialize,t_total,"
           "throughput_rps,cpu_user_s,cpu_kernel_s,rss_peak_bytes";
}

std::string report_csv_row(const TransferReport& r) {
    std::string row = r.mode;
    row += ',' + std::to_string(r.payload_bytes);
    row += ',' + std::to_string(r.trial);
    row += ',' + format_double(r.t_locate);
    row += ',' + format_double(r.t_serialize);
    row += ',' + format_double(r.t_transfer);
    row += ',' + format_double(r.t_deserialize);
    row += ',' + format_double(r.t_total);
    row += ',' + format_double(r.throughput_rps);
    row += ',' + format_double(r.cpu_user_s);
    row += ',' + format_double(r.cpu_kernel_s);
    row += ',' + std::to_string(r.rss_peak_bytes);
    return row;
}

Status emit_report(const std::vector<TransferReport>& reports, const std::string& path) {
    if (reports.empty()) {
        return make_error(ErrorKind::AllocationFailed, "no reports to emit");
    }
    {
        std::ofstream out(path);
        if (!out) {
            return make_error(ErrorKind::PeerUnreachable, "cannot open " + path + " for writing");
        }
        out << report_csv_header() << '\n';
        for (const TransferReport& r : reports) {
            out << report_csv_row(r) << '\n';
        }
        if (!out.flush()) {
            return make_error(ErrorKind::PeerUnreachable, "failed writing " + path);
        }
    }

    std::string summary_path = path + ".summary.csv";
    std::ofstream out(summary_path);
    if (!out) {
        return make_error(ErrorKind::PeerUnreachable,
                          "cannot open " + summary_path + " for writing");
    }
    out << "# cpu_user_s/cpu_kernel_s are per-process getrusage deltas over each trial,\n"
           "# not cgroup counters; rss_peak_bytes is the process high-water mark.\n"
           "# throughput for sub-second transfers is extrapolated as 1/t_total.\n";
    out << "mode,payload_bytes,trials,mean_t_total,stddev_t_total,mean_throughput_rps,"
           "mean_t_serialize,mean_t_deserialize,mean_t_transfer,mean_t_locate\n";
    for (const SummaryRow& row : summarize(reports)) {
        out << row.mode << ',' << row.payload_bytes << ',' << row.trials << ','
            << format_double(row.mean_t_total) << ',' << format_double(row.stddev_t_total) << ','
            << format_double(row.mean_throughput_rps) << ','
            << format_double(row.mean_t_serialize) << ','
            << format_double(row.mean_t_deserialize) << ','
            << format_double(row.mean_t_transfer) << ',' << format_double(row.mean_t_locate)
            << '\n';
    }
    if (!out.flush()) {
        return make_error(ErrorKind::PeerUnreachable, "failed writing " + summary_path);
    }
    return ok_status();
}

}  // namespace rr::bench
