#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "hombridge/error.hpp"

namespace hombridge::detail {

namespace {

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

// Planner calls are not thread-safe in FFTW; everything that creates a plan
// goes through this mutex.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class Plan, class Destroy>
class PlanCache {
 public:
  explicit PlanCache(Destroy destroy) : destroy_(destroy) {}
  ~PlanCache() {
    for (auto& [key, plan] : plans_) destroy_(plan);
  }

  template <class Make>
  Plan get(std::size_t n, bool forward, Make&& make) {
    std::lock_guard lock(planner_mutex());
    const auto key = std::make_pair(n, forward);
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      Plan plan = make();
      if (!plan) throw Error("FFTW failed to create a plan");
      it = plans_.emplace(key, plan).first;
    }
    return it->second;
  }

 private:
  Destroy destroy_;
  std::map<std::pair<std::size_t, bool>, Plan> plans_;
};

auto& long_plans() {
  static PlanCache<fftwl_plan, void (*)(fftwl_plan)> cache(&fftwl_destroy_plan);
  return cache;
}

auto& double_plans() {
  static PlanCache<fftw_plan, void (*)(fftw_plan)> cache(&fftw_destroy_plan);
  return cache;
}

}  // namespace

void forward_fft(std::span<const long double> in, std::span<std::complex<long double>> out) {
  const std::size_t n = in.size();
  auto plan = long_plans().get(n, true, [n] {
    std::vector<long double> a(n);
    std::vector<std::complex<long double>> b(n / 2 + 1);
    return fftwl_plan_dft_r2c_1d(static_cast<int>(n), a.data(),
                                 reinterpret_cast<fftwl_complex*>(b.data()), kFlags);
  });
  std::vector<long double> copy(in.begin(), in.end());
  fftwl_execute_dft_r2c(plan, copy.data(), reinterpret_cast<fftwl_complex*>(out.data()));
}

void forward_fft(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = in.size();
  auto plan = double_plans().get(n, true, [n] {
    std::vector<double> a(n);
    std::vector<std::complex<double>> b(n / 2 + 1);
    return fftw_plan_dft_r2c_1d(static_cast<int>(n), a.data(),
                                reinterpret_cast<fftw_complex*>(b.data()), kFlags);
  });
  std::vector<double> copy(in.begin(), in.end());
  fftw_execute_dft_r2c(plan, copy.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_fft(std::span<const std::complex<long double>> in, std::span<long double> out) {
  const std::size_t n = out.size();
  auto plan = long_plans().get(n, false, [n] {
    std::vector<long double> a(n);
    std::vector<std::complex<long double>> b(n / 2 + 1);
    return fftwl_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftwl_complex*>(b.data()),
                                 a.data(), kFlags);
  });
  // c2r overwrites its input.
  std::vector<std::complex<long double>> copy(in.begin(), in.end());
  fftwl_execute_dft_c2r(plan, reinterpret_cast<fftwl_complex*>(copy.data()), out.data());
}

void inverse_fft(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = out.size();
  auto plan = double_plans().get(n, false, [n] {
    std::vector<double> a(n);
    std::vector<std::complex<double>> b(n / 2 + 1);
    return fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(b.data()),
                                a.data(), kFlags);
  });
  std::vector<std::complex<double>> copy(in.begin(), in.end());
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(copy.data()), out.data());
}

}  // namespace hombridge::detail
