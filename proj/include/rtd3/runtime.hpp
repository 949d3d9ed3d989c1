#pragma once

namespace rtd3 {

// Keeps the large per-update temporaries on the heap instead of fresh
// mmap/munmap pairs (glibc only; no-op elsewhere). Call once at startup.
void configure_allocator();

}  // namespace rtd3
