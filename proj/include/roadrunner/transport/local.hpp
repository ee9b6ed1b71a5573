#pragma once

#include "roadrunner/frame.hpp"
#include "roadrunner/transport/delivery.hpp"

namespace rr::transport {

// Two instances co-hosted by one shim under one workflow.
struct LocalRoute {
    std::uint32_t source_instance = 0;
    std::uint32_t target_instance = 0;
    WorkflowId workflow_id{};
};

// Same-VM transfer: locate the capture's region in the source, allocate in
// the target, move the bytes with a single direct memory-to-memory copy and
// publish the mailbox. No serialization step touches the payload; the only
// payload-touching call is the copy itself. The caller follows up with
// sink.complete() to hand the target guest its turn.
Result<MemoryRegion> deliver_local(host::Instance& source, DeliverySink& target_sink,
                                   const LocalRoute& route,
                                   const host::HostCallCapture& capture);

}  // namespace rr::transport
