#pragma once

// Test helpers for working with the built sample guests.

#include <doctest.h>

#include <string>

#include "roadrunner/host/instance.hpp"

#ifndef RR_GUESTS_DIR
#error "RR_GUESTS_DIR must point at the built guest modules"
#endif

namespace guestutil {

inline std::string guest_path(const char* name) {
    return std::string(RR_GUESTS_DIR) + "/" + name;
}

inline std::unique_ptr<rr::host::Instance> make_instance(const char* name,
                                                         std::uint64_t max_memory = 64ull << 20) {
    auto r = rr::host::Instance::instantiate_file(guest_path(name),
                                                  rr::host::InstanceLimits{max_memory});
    REQUIRE_MESSAGE(r.ok(), (r.ok() ? "" : r.error().to_string()));
    return std::move(r).value();
}

// Stages payload bytes into a fresh allocation, publishes the mailbox and
// invokes run().
inline rr::Result<rr::MemoryRegion> stage_input(rr::host::Instance& inst,
                                                std::span<const std::uint8_t> payload,
                                                bool invoke_run = true) {
    auto region = inst.guest_alloc(payload.size());
    if (!region.ok()) return region;
    if (auto s = inst.write_memory(payload, region.value().offset); !s.ok())
        return std::move(s).error();
    if (auto s = inst.write_mailbox(region.value()); !s.ok()) return std::move(s).error();
    if (invoke_run) {
        if (auto r = inst.invoke("run", {}); !r.ok()) return std::move(r).error();
    }
    return region;
}

inline std::vector<std::uint8_t> bytes_of(const char* text) {
    return std::vector<std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text),
                                     reinterpret_cast<const std::uint8_t*>(text) +
                                         std::string(text).size());
}

}  // namespace guestutil
