#include "guest_common.h"

#include <stddef.h>

extern unsigned char __heap_base;

/* Blocks carry an 8-byte header holding the payload size. Free blocks keep
 * a next pointer in the header's second word and are kept address-ordered
 * so adjacent blocks coalesce on free. */
#define HDR_SIZE 8u
#define MIN_SPLIT 24u

typedef struct {
    uint32_t size; /* payload bytes */
    uint32_t next; /* next free block address, 0 = end (free blocks only) */
} BlockHdr;

static uint32_t free_head; /* address of first free block header, 0 = empty */
static uint32_t heap_end;  /* first byte past the last carved block */

static BlockHdr *hdr_at(uint32_t addr) { return (BlockHdr *)(uintptr_t)addr; }

static uint32_t mem_bytes(void) { return (uint32_t)__builtin_wasm_memory_size(0) * 65536u; }

static uint32_t heap_start(void) {
    return ((uint32_t)(uintptr_t)&__heap_base + 7u) & ~7u;
}

uint32_t rr_alloc(uint32_t len) {
    if (len == 0 || len > 0xFFFFFF00u) return 0;
    uint32_t need = (len + 7u) & ~7u;

    uint32_t prev = 0;
    for (uint32_t cur = free_head; cur; prev = cur, cur = hdr_at(cur)->next) {
        BlockHdr *h = hdr_at(cur);
        if (h->size < need) continue;
        if (h->size >= need + HDR_SIZE + MIN_SPLIT) {
            uint32_t tail = cur + HDR_SIZE + need;
            BlockHdr *t = hdr_at(tail);
            t->size = h->size - need - HDR_SIZE;
            t->next = h->next;
            h->size = need;
            if (prev)
                hdr_at(prev)->next = tail;
            else
                free_head = tail;
        } else {
            if (prev)
                hdr_at(prev)->next = h->next;
            else
                free_head = h->next;
        }
        h->next = 0;
        return cur + HDR_SIZE;
    }

    if (heap_end == 0) heap_end = heap_start();
    uint32_t addr = heap_end;
    uint32_t new_end = addr + HDR_SIZE + need;
    if (new_end < addr) return 0; /* address space wrap */
    while (new_end > mem_bytes()) {
        uint32_t missing = new_end - mem_bytes();
        uint32_t pages = (missing + 65535u) / 65536u;
        if (__builtin_wasm_memory_grow(0, pages) == (unsigned long)-1) return 0;
    }
    BlockHdr *h = hdr_at(addr);
    h->size = need;
    h->next = 0;
    heap_end = new_end;
    return addr + HDR_SIZE;
}

void rr_free(uint32_t offset) {
    if (offset < HDR_SIZE) return;
    uint32_t addr = offset - HDR_SIZE;
    BlockHdr *h = hdr_at(addr);

    /* address-ordered insert */
    uint32_t prev = 0, cur = free_head;
    while (cur && cur < addr) {
        prev = cur;
        cur = hdr_at(cur)->next;
    }
    if (cur == addr) return; /* already free */
    h->next = cur;
    if (prev)
        hdr_at(prev)->next = addr;
    else
        free_head = addr;

    /* coalesce with successor, then predecessor */
    if (cur && addr + HDR_SIZE + h->size == cur) {
        h->size += HDR_SIZE + hdr_at(cur)->size;
        h->next = hdr_at(cur)->next;
    }
    if (prev && prev + HDR_SIZE + hdr_at(prev)->size == addr) {
        hdr_at(prev)->size += HDR_SIZE + h->size;
        hdr_at(prev)->next = h->next;
    }
}

#ifndef RR_OMIT_ALLOCATE_EXPORT
RR_EXPORT("allocate_memory") uint32_t allocate_memory(uint32_t len) { return rr_alloc(len); }
#endif

RR_EXPORT("deallocate_memory") void deallocate_memory(uint32_t offset) { rr_free(offset); }

#define FNV_OFFSET 14695981039346656037ull
#define FNV_PRIME 1099511628211ull

uint64_t rr_fnv1a64(uint32_t offset, uint32_t len) {
    uint64_t h = FNV_OFFSET;
    uint32_t i = 0;
    for (; i + 8 <= len; i += 8) {
        uint64_t w = rr_load_u64(offset + i);
        h = (h ^ (w & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 8) & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 16) & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 24) & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 32) & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 40) & 0xFF)) * FNV_PRIME;
        h = (h ^ ((w >> 48) & 0xFF)) * FNV_PRIME;
        h = (h ^ (w >> 56)) * FNV_PRIME;
    }
    const uint8_t *p = (const uint8_t *)(uintptr_t)offset;
    for (; i < len; i++) h = (h ^ p[i]) * FNV_PRIME;
    return h;
}

RR_EXPORT("checksum") uint64_t checksum(uint32_t offset, uint32_t len) {
    return rr_fnv1a64(offset, len);
}

#define LCG_MUL 6364136223846793005ull
#define LCG_INC 1442695040888963407ull

void rr_lcg_fill(uint32_t offset, uint32_t len, uint64_t seed) {
    uint64_t s = seed;
    uint32_t i = 0;
    for (; i + 8 <= len; i += 8) {
        uint64_t w;
        s = s * LCG_MUL + LCG_INC; w = s & 0xFF;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 8;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 16;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 24;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 32;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 40;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 48;
        s = s * LCG_MUL + LCG_INC; w |= (s & 0xFF) << 56;
        *(uint64_t *)(uintptr_t)(offset + i) = w;
    }
    uint8_t *p = (uint8_t *)(uintptr_t)offset;
    for (; i < len; i++) {
        s = s * LCG_MUL + LCG_INC;
        p[i] = (uint8_t)s;
    }
}

/* The compiler may lower aggregate moves and loops into these. */
void *memcpy(void *dst, const void *src, size_t n) {
    uint8_t *d = dst;
    const uint8_t *s = src;
    for (; n >= 8; n -= 8, d += 8, s += 8) *(uint64_t *)d = *(const uint64_t *)s;
    while (n--) *d++ = *s++;
    return dst;
}

void *memset(void *dst, int c, size_t n) {
    uint8_t *d = dst;
    while (n--) *d++ = (uint8_t)c;
    return dst;
}

void *memmove(void *dst, const void *src, size_t n) {
    uint8_t *d = dst;
    const uint8_t *s = src;
    if (d < s) return memcpy(dst, src, n);
    d += n;
    s += n;
    while (n--) *--d = *--s;
    return dst;
}
