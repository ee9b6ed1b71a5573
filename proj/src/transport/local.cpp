#include "roadrunner/transport/local.hpp"

#include <cstring>

namespace rr::transport {

Result<MemoryRegion> deliver_local(host::Instance& source, DeliverySink& target_sink,
                                   const LocalRoute& route,
                                   const host::HostCallCapture& capture) {
    if (route.source_instance == route.target_instance) {
        return make_error(ErrorKind::RegistryMiss, "local route from an instance to itself");
    }
    if (source.id() != route.source_instance || capture.instance_id != route.source_instance) {
        return make_error(ErrorKind::RegistryMiss, "capture does not belong to the route source");
    }
    if (target_sink.instance().id() != route.target_instance) {
        return make_error(ErrorKind::RegistryMiss, "sink does not match the route target");
    }
    if (capture.region.length == 0) {
        return make_error(ErrorKind::BoundsViolation, "zero-length region cannot be transferred");
    }

    auto src = source.memory_view(capture.region);
    if (!src.ok()) return std::move(src).error();

    return target_sink.stage(capture.region.length, [&](std::span<std::uint8_t> dst) -> Status {
        std::memcpy(dst.data(), src.value().data(), dst.size());
        count_bulk_copy();
        return ok_status();
    });
}

}  // namespace rr::transport
