#pragma once

#include <algorithm>
#include <exception>
#include <future>
#include <optional>
#include <thread>
#include <vector>

namespace eapm {

// Run independent restarts on a bounded thread pool; results and errors keep
// restart order so the reduction is deterministic regardless of scheduling.
// A restart may decline to produce a value by returning an empty optional.
template <typename T, typename F>
std::vector<std::optional<T>> map_restarts(int n, F&& run) {
    std::vector<std::optional<T>> out(static_cast<size_t>(n));
    std::vector<std::exception_ptr> err(static_cast<size_t>(n));
    const int width = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    for (int base = 0; base < n; base += width) {
        const int hi = std::min(n, base + width);
        std::vector<std::future<void>> batch;
        batch.reserve(static_cast<size_t>(hi - base));
        for (int k = base; k < hi; ++k)
            batch.push_back(std::async(std::launch::async, [&, k] {
                try {
                    out[static_cast<size_t>(k)] = run(k);
                } catch (...) {
                    err[static_cast<size_t>(k)] = std::current_exception();
                }
            }));
        for (auto& f : batch) f.get();
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace eapm
