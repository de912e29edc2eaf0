#pragma once

namespace addn {

/// Keeps freed tensor buffers inside the process. Every op allocates its
/// output and gradient afresh, and with glibc's default thresholds the large
/// ones go back to the kernel on free, so each training step pays page
/// faults again. Call once at startup from executables; harmless elsewhere.
void configure_allocator();

}  // namespace addn
