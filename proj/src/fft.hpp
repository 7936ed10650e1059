#pragma once

#include <complex>
#include <map>
#include <utility>

#include <fftw3.h>

namespace strz::detail {

// Unnormalised in-place DFTs. Plans are made with FFTW_ESTIMATE so the
// chosen algorithm, and therefore every rounding, is identical run to run.
class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }
    void forward(std::complex<double>* data, int n) { run(data, n, FFTW_FORWARD); }
    void backward(std::complex<double>* data, int n) { run(data, n, FFTW_BACKWARD); }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& kv : plans_) fftw_destroy_plan(kv.second);
    }
    void run(std::complex<double>* data, int n, int dir) {
        auto key = std::make_pair(n, dir);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            auto* buf = fftw_alloc_complex(n);
            fftw_plan p = fftw_plan_dft_1d(n, buf, buf, dir, FFTW_ESTIMATE | FFTW_UNALIGNED);
            fftw_free(buf);
            it = plans_.emplace(key, p).first;
        }
        auto* d = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(it->second, d, d);
    }
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

} // namespace strz::detail
