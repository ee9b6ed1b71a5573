#pragma once

#include <map>
#include <vector>

#include "roadrunner/runtime/config.hpp"

namespace rr::runtime {

enum class TransferMode { User, Kernel, Network };

const char* to_string(TransferMode mode);

// mode follows the target's declared placement: co-instantiated functions
// exchange through user-space memory, same-host functions through the
// host-local stream, remote functions over the network.
struct RouteDecision {
    TransferMode mode;
    const FunctionRecord* target;
};

// Immutable after construction; reads are unsynchronized snapshots.
class Registry {
public:
    static Result<Registry> build(std::vector<FunctionRecord> records);

    const FunctionRecord* find(const WorkflowId& workflow, std::uint32_t function_id) const;

    // Both ids must be registered under the same workflow.
    Result<RouteDecision> resolve_route(const WorkflowId& workflow, std::uint32_t source_fn,
                                        std::uint32_t target_fn) const;

    const std::vector<FunctionRecord>& records() const { return records_; }

private:
    std::vector<FunctionRecord> records_;
    std::map<std::pair<WorkflowId, std::uint32_t>, std::size_t> index_;
};

}  // namespace rr::runtime
