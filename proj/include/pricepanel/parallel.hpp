#pragma once

#include <cstddef>
#include <functional>

namespace pricepanel {

// Effective worker count: hardware concurrency capped by the PANEL_THREADS
// environment variable (values < 1 mean serial).
int thread_limit();

// Static partition of [0, n) across workers. Chunks are disjoint, so any
// computation whose writes stay inside its own indices is bit-deterministic
// regardless of the worker count. Runs serial below `serial_below` items.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t serial_below = 2048);

}  // namespace pricepanel
