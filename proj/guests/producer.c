/* Producer guest: the staged input is a 16-byte parameter block (seed u64,
 * byte count u64, little-endian). run() allocates the requested buffer,
 * fills it from the LCG and announces it to the shim. */
#include "guest_common.h"

RR_EXPORT("run") void run(void) {
    uint32_t off = rr_mailbox_offset();
    uint32_t len = rr_mailbox_length();
    if (len != 16) __builtin_trap();
    uint64_t seed = rr_load_u64(off);
    uint64_t n = rr_load_u64(off + 8);
    if (n == 0 || n > 0xFFFFFF00ull) __builtin_trap();
    uint32_t buf = rr_alloc((uint32_t)n);
    if (!buf) __builtin_trap();
    rr_lcg_fill(buf, (uint32_t)n, seed);
    send_to_host(buf, (uint32_t)n);
}
