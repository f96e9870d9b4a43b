#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace qlab {

// Selects the loop driver for per-node kernels. Every kernel writes only its own output
// slot, so both policies produce bit-identical results; the serial path is the reference.
enum class Exec { serial, parallel };

// Applies body(i) for i in [0, n).
template <typename Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    // Exceptions must not escape the parallel region; the first one is rethrown afterwards.
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace qlab
