#pragma once

// Internal: frame-serving loop shared by the kernel and network listeners.

#include <functional>
#include <optional>

#include "roadrunner/frame.hpp"
#include "roadrunner/net/socket.hpp"
#include "roadrunner/transport/delivery.hpp"
#include "roadrunner/transport/kernel.hpp"

namespace rr::transport::detail {

// Produces the fill strategy for one frame's payload (plain chunked reads,
// or the hose path on the network plane).
using FillFactory = std::function<FillFn(std::uint64_t payload_len)>;

// Picks the destination sink for a DATA frame; an error refuses the frame
// (the payload is drained and an ERROR frame returned, the connection
// stays up).
using SinkResolver = std::function<Result<DeliverySink*>(const FrameHeader&)>;

void send_error_frame(int fd, const FrameHeader& request, const TransferError& err,
                      net::Millis timeout);

// Serves DATA frames on one connection until EOF or a fatal framing error.
// Refused frames (unknown target, allocation failure) are reported to the
// peer and the connection stays usable; malformed frames drop the
// connection after the ERROR frame.
void serve_frames(int fd, const SinkResolver& resolve, const TransportOptions& options,
                  const FillFactory& make_fill);

}  // namespace rr::transport::detail
