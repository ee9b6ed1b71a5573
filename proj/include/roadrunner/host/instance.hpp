#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"
#include "roadrunner/memory_region.hpp"
#include "roadrunner/wasm/vm.hpp"

namespace rr::host {

// Descriptor a guest hands to the shim through send_to_host: "this region
// of my memory is ready to go". Only the descriptor crosses the boundary;
// payload bytes stay in place until a transport moves them.
struct HostCallCapture {
    MemoryRegion region;
    std::uint32_t instance_id = 0;
    std::uint64_t sequence_no = 0;
};

struct InstanceLimits {
    std::uint64_t max_memory_bytes = 256ull * 1024 * 1024;
};

// One guest module instantiated in its own sandbox, plus the shim-side
// memory operations. Memory writes are restricted to live guest
// allocations; every access is bounds-checked against the current memory
// size. Operations on a single instance must be externally serialized by
// the caller; distinct instances are fully independent.
class Instance {
public:
    static Result<std::unique_ptr<Instance>> instantiate(std::span<const std::uint8_t> module_binary,
                                                         const InstanceLimits& limits);
    static Result<std::unique_ptr<Instance>> instantiate(std::shared_ptr<const wasm::Module> module,
                                                         const InstanceLimits& limits);
    static Result<std::unique_ptr<Instance>> instantiate_file(const std::string& wasm_path,
                                                              const InstanceLimits& limits);

    std::uint32_t id() const { return id_; }
    std::uint64_t memory_size() const { return vm_->memory_size(); }
    bool has_export(std::string_view name) const;
    std::vector<std::string> export_names() const;

    // Calls the guest's allocator. Offset 0 from the guest means failure;
    // the low 16 bytes of linear memory are reserved so 0 is never valid.
    Result<MemoryRegion> guest_alloc(std::uint64_t len);
    Status guest_dealloc(MemoryRegion region);

    Result<std::vector<std::uint8_t>> read_memory(MemoryRegion region) const;
    Status write_memory(std::span<const std::uint8_t> data, std::uint32_t offset);

    // Borrowed views for transports that move bytes without staging them.
    // Invalidated by any guest execution or allocation (memory may grow).
    Result<std::span<const std::uint8_t>> memory_view(MemoryRegion region) const;
    // Mutable view of a live allocated region (write rules apply).
    Result<std::span<std::uint8_t>> memory_span(MemoryRegion region);

    // Stores the delivered region's (offset, length) into the mailbox words
    // so run() can find its input.
    Status write_mailbox(MemoryRegion delivered);

    Result<std::vector<std::uint64_t>> invoke(std::string_view export_name,
                                              std::span<const std::uint64_t> args);

    // Returns and clears captures recorded since the previous call, in
    // sequence order.
    std::vector<HostCallCapture> take_captures();

    std::uint64_t live_allocation_count() const { return live_regions_.size(); }

private:
    Instance() = default;

    Status check_bounds(MemoryRegion region) const;
    bool within_live_region(std::uint32_t offset, std::uint64_t length) const;

    std::uint32_t id_ = 0;
    std::shared_ptr<const wasm::Module> module_;
    std::unique_ptr<wasm::VmInstance> vm_;
    std::map<std::uint32_t, std::uint64_t> live_regions_;  // offset -> length
    std::vector<HostCallCapture> captures_;
    std::uint64_t next_sequence_ = 0;
};

}  // namespace rr::host
