#include "roadrunner/runtime/registry.hpp"

namespace rr::runtime {

const char* to_string(TransferMode mode) {
    switch (mode) {
    case TransferMode::User: return "user";
    case TransferMode::Kernel: return "kernel";
    case TransferMode::Network: return "network";
    }
    return "?";
}

Result<Registry> Registry::build(std::vector<FunctionRecord> records) {
    Registry reg;
    reg.records_ = std::move(records);
    for (std::size_t i = 0; i < reg.records_.size(); i++) {
        const FunctionRecord& r = reg.records_[i];
        auto key = std::make_pair(r.workflow_id, r.function_id);
        if (!reg.index_.emplace(key, i).second) {
            return make_error(ErrorKind::RegistryMiss,
                              "duplicate function id " + std::to_string(r.function_id) +
                                  " in workflow " + workflow_to_hex(r.workflow_id));
        }
    }
    return reg;
}

const FunctionRecord* Registry::find(const WorkflowId& workflow,
                                     std::uint32_t function_id) const {
    auto it = index_.find({workflow, function_id});
    return it == index_.end() ? nullptr : &records_[it->second];
}

Result<RouteDecision> Registry::resolve_route(const WorkflowId& workflow,
                                              std::uint32_t source_fn,
                                              std::uint32_t target_fn) const {
    const FunctionRecord* source = find(workflow, source_fn);
    if (!source) {
        return make_error(ErrorKind::RegistryMiss,
                          "source function " + std::to_string(source_fn) +
                              " not registered in workflow " + workflow_to_hex(workflow));
    }
    const FunctionRecord* target = find(workflow, target_fn);
    if (!target) {
        return make_error(ErrorKind::RegistryMiss,
                          "target function " + std::to_string(target_fn) +
                              " not registered in workflow " + workflow_to_hex(workflow));
    }
    TransferMode mode;
    switch (target->locality) {
    case Locality::SameVm: mode = TransferMode::User; break;
    case Locality::SameHost: mode = TransferMode::Kernel; break;
    case Locality::Remote: mode = TransferMode::Network; break;
    default: return make_error(ErrorKind::RegistryMiss, "unmapped locality");
    }
    return RouteDecision{mode, target};
}

}  // namespace rr::runtime
