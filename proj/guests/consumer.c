/* Consumer guest: run() reads the delivered region named by the mailbox,
 * checksums it and stores the result for later inspection. */
#include "guest_common.h"

static uint64_t last;

RR_EXPORT("run") void run(void) {
    last = rr_fnv1a64(rr_mailbox_offset(), rr_mailbox_length());
}

RR_EXPORT("last_checksum") uint64_t last_checksum(void) { return last; }
