/* Shared guest-side runtime: allocator, checksum, payload generator and the
 * mailbox convention. Compiled into each sample guest. */
#ifndef RR_GUEST_COMMON_H
#define RR_GUEST_COMMON_H

#include <stdint.h>

#define RR_EXPORT(name) __attribute__((export_name(name)))
#define RR_IMPORT(mod, name) __attribute__((import_module(mod), import_name(name)))

RR_IMPORT("roadrunner", "send_to_host") void send_to_host(uint32_t offset, uint32_t len);

/* Free-list allocator over linear memory above __heap_base. Returns 0 on
 * failure; offset 0 is never a valid allocation. */
uint32_t rr_alloc(uint32_t len);
void rr_free(uint32_t offset);

/* FNV-1a 64-bit over [offset, offset+len). */
uint64_t rr_fnv1a64(uint32_t offset, uint32_t len);

/* Fills [offset, offset+len) from a 64-bit LCG: one step per byte, low
 * byte of the state after each step. */
void rr_lcg_fill(uint32_t offset, uint32_t len, uint64_t seed);

/* Mailbox words the shim writes before invoking run(): where delivered
 * data landed. */
#define RR_MAILBOX_OFFSET_ADDR 8u
#define RR_MAILBOX_LENGTH_ADDR 12u

static inline uint32_t rr_mailbox_offset(void) {
    return *(volatile uint32_t *)(uintptr_t)RR_MAILBOX_OFFSET_ADDR;
}

static inline uint32_t rr_mailbox_length(void) {
    return *(volatile uint32_t *)(uintptr_t)RR_MAILBOX_LENGTH_ADDR;
}

static inline uint64_t rr_load_u64(uint32_t addr) {
    return *(const uint64_t *)(uintptr_t)addr;
}

#endif
