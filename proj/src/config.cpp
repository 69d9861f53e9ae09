#include <atomic>
#include <cstddef>

#include "iklkit/errors.hpp"

namespace iklkit::config {

namespace {
std::atomic<std::size_t> g_cell_limit{std::size_t{1} << 20};
}

std::size_t cell_limit() {
    return g_cell_limit.load(std::memory_order_relaxed);
}

void set_cell_limit(std::size_t cells) {
    if (cells == 0) throw InputError("cell limit must be positive");
    g_cell_limit.store(cells, std::memory_order_relaxed);
}

}  // namespace iklkit::config
