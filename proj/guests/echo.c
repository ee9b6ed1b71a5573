/* Echo guest: run() hands the staged input region straight back to the
 * shim. Extra exports exercise trap paths and multi-send ordering. */
#include "guest_common.h"

RR_EXPORT("run") void run(void) {
    send_to_host(rr_mailbox_offset(), rr_mailbox_length());
}

/* Sends the staged region as two back-to-back descriptors. */
RR_EXPORT("send_split") void send_split(void) {
    uint32_t off = rr_mailbox_offset();
    uint32_t len = rr_mailbox_length();
    uint32_t half = len / 2;
    send_to_host(off, half);
    send_to_host(off + half, len - half);
}

/* Descriptor far beyond linear memory; the host must reject it. */
RR_EXPORT("send_out_of_bounds") void send_out_of_bounds(void) {
    send_to_host(0xFFFFFF00u, 4096);
}

RR_EXPORT("crash") void crash(void) { __builtin_trap(); }
