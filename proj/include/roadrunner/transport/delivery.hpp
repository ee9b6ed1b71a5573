#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>

#include "roadrunner/error.hpp"
#include "roadrunner/host/instance.hpp"
#include "roadrunner/memory_region.hpp"

namespace rr::transport {

// Fills the destination span completely, or errors. The span points into
// the target's linear memory, so transports land payload bytes with no
// intermediate staging buffer.
using FillFn = std::function<Status(std::span<std::uint8_t>)>;

// Receiving half shared by every plane: allocate in the target, land the
// payload, publish the mailbox, then hand the guest its turn.
//
// Delivery is two-phase. stage() allocates, fills and writes the mailbox;
// a fill failure deallocates the partial region and reports the error, so
// run() never observes partial data. complete() invokes run() and, when
// configured, returns the region to the guest allocator. Senders are
// acknowledged between the phases, so transfer acknowledgement marks
// committed data, not consumed data.
class DeliverySink {
public:
    explicit DeliverySink(host::Instance& target, bool dealloc_after_run = true)
        : target_(target), dealloc_after_run_(dealloc_after_run) {}

    host::Instance& instance() { return target_; }

    // Deliveries into one instance are serialized by holding this across
    // stage() + complete().
    std::mutex& mutex() { return mutex_; }

    Result<MemoryRegion> stage(std::uint64_t payload_len, const FillFn& fill);
    Status complete(MemoryRegion region);

    // Last successfully completed delivery, for verification.
    std::optional<MemoryRegion> last_delivery() const;
    std::uint64_t completed_count() const;
    std::uint64_t run_failures() const { return run_failures_.load(); }

    // Blocks until at least `count` deliveries completed (run() returned).
    bool wait_for_completed(std::uint64_t count, std::chrono::milliseconds timeout);

private:
    host::Instance& target_;
    bool dealloc_after_run_;
    std::mutex mutex_;

    mutable std::mutex state_mutex_;
    std::condition_variable state_cv_;
    std::optional<MemoryRegion> last_;
    std::uint64_t completed_ = 0;
    std::atomic<std::uint64_t> run_failures_{0};
};

// Bulk payload copies performed by the user-space plane, for copy-count
// assertions in tests.
std::uint64_t bulk_copy_count();
void reset_bulk_copy_count();
void count_bulk_copy();

}  // namespace rr::transport
