// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace pulseforge::detail {

// Thin wrapper over FFTW for complex transforms of arbitrary length.
//
// Conventions (unnormalized, matching the usual DFT pair):
//   forward:  X[k] = sum_n x[n] exp(-j 2 pi k n / N)
//   inverse:  x[n] = sum_k X[k] exp(+j 2 pi k n / N)
//
// FFTW's planner is not thread-safe, so plan creation is serialized behind a
// global mutex. Plans and their aligned buffers are cached per thread, which
// keeps fftw_execute calls contention-free when frames or grid points are
// processed in parallel.
class FftEngine {
public:
    static void transform(const std::complex<double>* in, std::complex<double>* out,
                          std::size_t n, int sign) {
        if (n == 0) return;
        Plan& p = plan_for(n, sign);
        std::memcpy(p.in, in, n * sizeof(std::complex<double>));
        fftw_execute(p.plan);
        std::memcpy(out, p.out, n * sizeof(std::complex<double>));
    }

    static std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& x) {
        std::vector<std::complex<double>> y(x.size());
        transform(x.data(), y.data(), x.size(), FFTW_FORWARD);
        return y;
    }

    static std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& x) {
        std::vector<std::complex<double>> y(x.size());
        transform(x.data(), y.data(), x.size(), FFTW_BACKWARD);
        return y;
    }

private:
    struct Plan {
        fftw_plan plan = nullptr;
        fftw_complex* in = nullptr;
        fftw_complex* out = nullptr;

        Plan(std::size_t n, int sign) {
            in = fftw_alloc_complex(n);
            out = fftw_alloc_complex(n);
            std::lock_guard<std::mutex> lock(planner_mutex());
            plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
        }
        Plan(const Plan&) = delete;
        Plan& operator=(const Plan&) = delete;
        ~Plan() {
            if (plan) {
                std::lock_guard<std::mutex> lock(planner_mutex());
                fftw_destroy_plan(plan);
            }
            fftw_free(in);
            fftw_free(out);
        }
    };

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    static Plan& plan_for(std::size_t n, int sign) {
        thread_local std::map<std::pair<std::size_t, int>, std::unique_ptr<Plan>> cache;
        auto& slot = cache[{n, sign}];
        if (!slot) slot = std::make_unique<Plan>(n, sign);
        return *slot;
    }
};

} // namespace pulseforge::detail
