#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"
#include "roadrunner/wasm/module.hpp"

namespace rr::wasm {

struct VmLimits {
    std::uint64_t max_memory_bytes = 256ull * 1024 * 1024;
};

// A function provided by the embedder, callable from guest code through the
// import section. Failure surfaces to the guest as a trap.
struct HostFunction {
    std::string module;
    std::string name;
    FuncType type;
    std::function<Status(std::span<const std::uint64_t> args, std::vector<std::uint64_t>& results)>
        invoke;
};

// One live instantiation: linear memory, globals, table and an interpreter
// over the module's pre-decoded code. Execution is single-threaded; callers
// serialize access per instance.
//
// Traps map onto the error taxonomy as follows: out-of-bounds memory access
// reports BoundsViolation, resource exhaustion reports AllocationFailed,
// everything else (unreachable, division by zero, indirect call misuse)
// reports GuestAbiMissing with a "guest trap:" detail.
class VmInstance {
public:
    static Result<std::unique_ptr<VmInstance>> create(std::shared_ptr<const Module> module,
                                                      const VmLimits& limits,
                                                      std::vector<HostFunction> host_functions);

    const Module& module() const { return *module_; }

    std::uint64_t memory_size() const { return memory_.size(); }
    std::span<const std::uint8_t> memory() const { return memory_; }
    std::span<std::uint8_t> memory_mut() { return memory_; }

    Result<std::vector<std::uint64_t>> call(std::uint32_t func_index,
                                            std::span<const std::uint64_t> args);
    Result<std::vector<std::uint64_t>> call_export(std::string_view name,
                                                   std::span<const std::uint64_t> args);

private:
    VmInstance() = default;

    struct Callee {
        const Function* fn = nullptr;        // local function
        const HostFunction* host = nullptr;  // imported function
        const FuncType* type = nullptr;
    };

    Result<std::vector<std::uint64_t>> execute(std::uint32_t func_index,
                                               std::span<const std::uint64_t> args);

    std::shared_ptr<const Module> module_;
    std::vector<HostFunction> host_functions_;
    std::vector<Callee> callees_;
    std::vector<std::uint8_t> memory_;
    std::uint32_t max_pages_ = 0;
    std::vector<std::uint64_t> globals_;
    std::vector<std::uint32_t> table_;
    std::vector<std::uint64_t> stack_;
    bool executing_ = false;
};

}  // namespace rr::wasm
