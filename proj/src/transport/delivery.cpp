#include "roadrunner/transport/delivery.hpp"

namespace rr::transport {

namespace {
std::atomic<std::uint64_t> g_bulk_copies{0};
}

std::uint64_t bulk_copy_count() { return g_bulk_copies.load(); }
void reset_bulk_copy_count() { g_bulk_copies.store(0); }
void count_bulk_copy() { g_bulk_copies.fetch_add(1); }

Result<MemoryRegion> DeliverySink::stage(std::uint64_t payload_len, const FillFn& fill) {
    auto region = target_.guest_alloc(payload_len);
    if (!region.ok()) return region;

    auto dst = target_.memory_span(region.value());
    if (!dst.ok()) {
        (void)target_.guest_dealloc(region.value());
        return std::move(dst).error();
    }
    if (auto s = fill(dst.value()); !s.ok()) {
        (void)target_.guest_dealloc(region.value());
        return std::move(s).error();
    }
    if (auto s = target_.write_mailbox(region.value()); !s.ok()) {
        (void)target_.guest_dealloc(region.value());
        return std::move(s).error();
    }
    return region;
}

Status DeliverySink::complete(MemoryRegion region) {
    auto r = target_.invoke("run", {});
    if (!r.ok()) run_failures_.fetch_add(1);
    if (dealloc_after_run_) {
        (void)target_.guest_dealloc(region);
    }
    {
        std::lock_guard lock(state_mutex_);
        last_ = region;
        completed_++;
    }
    state_cv_.notify_all();
    if (!r.ok()) return std::move(r).error();
    return ok_status();
}

std::optional<MemoryRegion> DeliverySink::last_delivery() const {
    std::lock_guard lock(state_mutex_);
    return last_;
}

std::uint64_t DeliverySink::completed_count() const {
    std::lock_guard lock(state_mutex_);
    return completed_;
}

bool DeliverySink::wait_for_completed(std::uint64_t count, std::chrono::milliseconds timeout) {
    std::unique_lock lock(state_mutex_);
    return state_cv_.wait_for(lock, timeout, [&] { return completed_ >= count; });
}

}  // namespace rr::transport
