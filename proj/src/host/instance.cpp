#include "roadrunner/host/instance.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <limits>

#include "roadrunner/abi.hpp"

namespace rr::host {

namespace {

std::atomic<std::uint32_t> next_instance_id{1};

}  // namespace

Result<std::unique_ptr<Instance>> Instance::instantiate(std::span<const std::uint8_t> module_binary,
                                                        const InstanceLimits& limits) {
    auto module = wasm::Module::parse(module_binary);
    if (!module.ok()) return std::move(module).error();
    return instantiate(std::make_shared<const wasm::Module>(std::move(module).value()), limits);
}

Result<std::unique_ptr<Instance>> Instance::instantiate_file(const std::string& wasm_path,
                                                             const InstanceLimits& limits) {
    std::ifstream in(wasm_path, std::ios::binary);
    if (!in) {
        return make_error(ErrorKind::GuestAbiMissing, "cannot open module file: " + wasm_path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return instantiate(bytes, limits);
}

Result<std::unique_ptr<Instance>> Instance::instantiate(std::shared_ptr<const wasm::Module> module,
                                                        const InstanceLimits& limits) {
    // The guest contract is enforced before the instance can participate in
    // any transfer: all required exports present with exact signatures.
    for (const abi::RequiredExport& req : abi::required_exports()) {
        const wasm::Export* e = module->find_export(req.name, wasm::ExternKind::Function);
        if (!e || !(module->function_type(e->index) == req.type)) {
            return make_error(ErrorKind::GuestAbiMissing,
                              std::string("required export missing or mismatched: ") + req.name);
        }
    }

    auto inst = std::unique_ptr<Instance>(new Instance());
    inst->id_ = next_instance_id.fetch_add(1);
    inst->module_ = std::move(module);

    Instance* self = inst.get();
    std::vector<wasm::HostFunction> host_fns;
    host_fns.push_back(wasm::HostFunction{
        abi::kHostModule, abi::kSendToHost, abi::send_to_host_type(),
        [self](std::span<const std::uint64_t> args, std::vector<std::uint64_t>&) -> Status {
            std::uint32_t offset = std::uint32_t(args[0]);
            std::uint32_t length = std::uint32_t(args[1]);
            // Out-of-bounds descriptors are rejected here, which surfaces
            // to the guest as a trap; no capture is recorded.
            if (std::uint64_t(offset) + length > self->vm_->memory_size()) {
                return make_error(ErrorKind::BoundsViolation,
                                  "send_to_host descriptor out of bounds");
            }
            self->captures_.push_back(HostCallCapture{MemoryRegion{offset, length}, self->id_,
                                                      self->next_sequence_++});
            return ok_status();
        }});

    wasm::VmLimits vm_limits{limits.max_memory_bytes};
    auto vm = wasm::VmInstance::create(inst->module_, vm_limits, std::move(host_fns));
    if (!vm.ok()) return std::move(vm).error();
    inst->vm_ = std::move(vm).value();
    return inst;
}

bool Instance::has_export(std::string_view name) const {
    return module_->find_export(name, wasm::ExternKind::Function) != nullptr;
}

std::vector<std::string> Instance::export_names() const {
    std::vector<std::string> names;
    for (const wasm::Export& e : module_->exports) {
        if (e.kind == wasm::ExternKind::Function) names.push_back(e.name);
    }
    return names;
}

Status Instance::check_bounds(MemoryRegion region) const {
    if (region.end() > vm_->memory_size()) {
        return make_error(ErrorKind::BoundsViolation,
                          "region [" + std::to_string(region.offset) + ", " +
                              std::to_string(region.end()) + ") exceeds memory size " +
                              std::to_string(vm_->memory_size()));
    }
    return ok_status();
}

bool Instance::within_live_region(std::uint32_t offset, std::uint64_t length) const {
    auto it = live_regions_.upper_bound(offset);
    if (it == live_regions_.begin()) return false;
    --it;
    return std::uint64_t(offset) + length <= std::uint64_t(it->first) + it->second;
}

Result<MemoryRegion> Instance::guest_alloc(std::uint64_t len) {
    if (len == 0) {
        return make_error(ErrorKind::AllocationFailed, "zero-length allocation");
    }
    if (len > std::uint64_t(std::numeric_limits<std::uint32_t>::max())) {
        return make_error(ErrorKind::AllocationFailed,
                          "allocation exceeds 32-bit address space");
    }
    auto r = vm_->call_export("allocate_memory", std::array<std::uint64_t, 1>{len});
    if (!r.ok()) return std::move(r).error();
    std::uint32_t offset = std::uint32_t(r.value().at(0));
    if (offset == 0) {
        return make_error(ErrorKind::AllocationFailed,
                          "guest allocator failed for " + std::to_string(len) + " bytes");
    }
    MemoryRegion region{offset, len};
    if (auto s = check_bounds(region); !s.ok()) {
        return make_error(ErrorKind::AllocationFailed,
                          "guest allocator returned out-of-bounds region");
    }
    // The allocator owns its heap; overlap with a live allocation means it
    // is broken, and trusting it would corrupt a neighbouring transfer.
    auto next = live_regions_.upper_bound(offset);
    if (next != live_regions_.end() && region.end() > next->first) {
        return make_error(ErrorKind::AllocationFailed, "guest allocator returned overlapping region");
    }
    if (next != live_regions_.begin()) {
        auto prev = std::prev(next);
        if (std::uint64_t(prev->first) + prev->second > offset) {
            return make_error(ErrorKind::AllocationFailed,
                              "guest allocator returned overlapping region");
        }
    }
    live_regions_[offset] = len;
    return region;
}

Status Instance::guest_dealloc(MemoryRegion region) {
    if (auto s = check_bounds(region); !s.ok()) return s;
    auto it = live_regions_.find(region.offset);
    if (it == live_regions_.end() || it->second != region.length) {
        // Unknown or already-released region: nothing to do. Live
        // allocations stay untouched.
        return ok_status();
    }
    auto r = vm_->call_export("deallocate_memory",
                              std::array<std::uint64_t, 1>{region.offset});
    if (!r.ok()) return std::move(r).error();
    live_regions_.erase(it);
    return ok_status();
}

Result<std::vector<std::uint8_t>> Instance::read_memory(MemoryRegion region) const {
    auto view = memory_view(region);
    if (!view.ok()) return std::move(view).error();
    return std::vector<std::uint8_t>(view.value().begin(), view.value().end());
}

Result<std::span<const std::uint8_t>> Instance::memory_view(MemoryRegion region) const {
    if (auto s = check_bounds(region); !s.ok()) return std::move(s).error();
    return vm_->memory().subspan(region.offset, region.length);
}

Status Instance::write_memory(std::span<const std::uint8_t> data, std::uint32_t offset) {
    MemoryRegion region{offset, data.size()};
    if (auto s = check_bounds(region); !s.ok()) return s;
    if (!within_live_region(offset, data.size())) {
        return make_error(ErrorKind::BoundsViolation,
                          "write to unregistered region at offset " + std::to_string(offset));
    }
    std::memcpy(vm_->memory_mut().data() + offset, data.data(), data.size());
    return ok_status();
}

Result<std::span<std::uint8_t>> Instance::memory_span(MemoryRegion region) {
    if (auto s = check_bounds(region); !s.ok()) return std::move(s).error();
    if (!within_live_region(region.offset, region.length)) {
        return make_error(ErrorKind::BoundsViolation,
                          "mutable view of unregistered region at offset " +
                              std::to_string(region.offset));
    }
    return vm_->memory_mut().subspan(region.offset, region.length);
}

Status Instance::write_mailbox(MemoryRegion delivered) {
    if (auto s = check_bounds(delivered); !s.ok()) return s;
    if (delivered.length > std::numeric_limits<std::uint32_t>::max()) {
        return make_error(ErrorKind::BoundsViolation, "mailbox length exceeds u32");
    }
    std::uint8_t* mem = vm_->memory_mut().data();
    std::uint32_t off = delivered.offset;
    std::uint32_t len = std::uint32_t(delivered.length);
    for (int i = 0; i < 4; i++) {
        mem[abi::kMailboxOffsetAddr + i] = std::uint8_t(off >> (8 * i));
        mem[abi::kMailboxLengthAddr + i] = std::uint8_t(len >> (8 * i));
    }
    return ok_status();
}

Result<std::vector<std::uint64_t>> Instance::invoke(std::string_view export_name,
                                                    std::span<const std::uint64_t> args) {
    return vm_->call_export(export_name, args);
}

std::vector<HostCallCapture> Instance::take_captures() {
    std::vector<HostCallCapture> out;
    out.swap(captures_);
    return out;
}

}  // namespace rr::host
