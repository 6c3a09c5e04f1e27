#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>

namespace ddspec {

// Every data-parallel kernel takes one of these. Serial is the reference
// implementation; Parallel must give identical results (work items own
// their random streams and reductions happen in a fixed order).
enum class Exec { Serial, Parallel };

// splitmix64 finalizer, used to derive independent substreams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index,
                                 std::uint64_t salt = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed ^ salt)),
                      static_cast<std::uint32_t>(mix64(seed ^ salt) >> 32),
                      static_cast<std::uint32_t>(mix64(index + 0x51ed27ull)),
                      static_cast<std::uint32_t>(mix64(index + 0x51ed27ull) >> 32)};
    return std::mt19937_64(seq);
}

// Runs fn(i) for i in [0, n). Exceptions thrown by work items are captured
// and the one from the lowest index is rethrown after the loop.
template <class F>
void parallel_for(std::size_t n, Exec exec, F&& fn, bool dynamic = false) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::size_t err_i = n;
    std::mutex m;
    auto guarded = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard lock(m);
            if (i < err_i) {
                err_i = i;
                err = std::current_exception();
            }
        }
    };
    if (dynamic) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    }
    if (err) std::rethrow_exception(err);
}

} // namespace ddspec
