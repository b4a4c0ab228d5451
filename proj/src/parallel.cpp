#include "mspline/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mspline {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MSPLINE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for_blocks(std::size_t count, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t blocks =
        std::min<std::size_t>(std::max(workers, 1), count);
    if (blocks <= 1) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(blocks - 1);
    const std::size_t base = count / blocks;
    const std::size_t extra = count % blocks;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t end = begin + base + (b < extra ? 1 : 0);
        if (b + 1 == blocks) {
            fn(begin, end);
        } else {
            pool.emplace_back(fn, begin, end);
        }
        begin = end;
    }
    for (auto& th : pool) th.join();
}

}  // namespace mspline
