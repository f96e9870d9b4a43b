#include "qlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace qlab {
namespace {

struct PlanKey {
    int rank;
    int n0;
    int n1;
    int sign;
    auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const PlanKey& key) {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const int n[2] = {key.n0, key.n1};
        const int total = key.rank == 1 ? key.n0 : key.n0 * key.n1;
        // Scratch buffer only used for planning; FFTW_ESTIMATE leaves it untouched.
        auto* buf = fftw_alloc_complex(static_cast<std::size_t>(total));
        fftw_plan plan = fftw_plan_dft(key.rank, n, buf, buf, key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(const Grid& grid, ComplexField& data, int sign) {
    const PlanKey key{grid.dim(), static_cast<int>(grid.points(0)),
                      grid.dim() == 2 ? static_cast<int>(grid.points(1)) : 1, sign};
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(key), ptr, ptr);
}

void execute(ComplexField& data, int sign) {
    if (data.empty()) return;
    const PlanKey key{1, static_cast<int>(data.size()), 1, sign};
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(key), ptr, ptr);
}

}  // namespace

void fft_forward(const Grid& grid, ComplexField& data) { execute(grid, data, FFTW_FORWARD); }
void fft_backward(const Grid& grid, ComplexField& data) { execute(grid, data, FFTW_BACKWARD); }
void fft_forward(ComplexField& data) { execute(data, FFTW_FORWARD); }
void fft_backward(ComplexField& data) { execute(data, FFTW_BACKWARD); }

}  // namespace qlab
