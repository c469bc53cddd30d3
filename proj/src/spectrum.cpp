#include "ctcfar/spectrum.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

// fftw planning is not thread-safe; execution on new arrays is. Plans are
// created unaligned so any Eigen buffer can be passed to fftw_execute_dft.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int rows, int cols) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({rows, cols});
    if (it != plans_.end()) return it->second;
    Eigen::MatrixXcd in(rows, cols);
    Eigen::MatrixXcd out(rows, cols);
    // Column-major rows x cols storage is row-major cols x rows to fftw.
    fftw_plan plan = fftw_plan_dft_2d(cols, rows, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error(ErrorKind::Numerical, "fftw planning failed");
    plans_.emplace(std::make_pair(rows, cols), plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [dims, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  PlanCache() = default;

  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace

RdStack rd_transform(const DataCube& cube) {
  RdStack stack;
  stack.params = cube.params;
  stack.channels.reserve(cube.channels.size());
  for (const auto& slice : cube.channels) {
    const int rows = static_cast<int>(slice.rows());
    const int cols = static_cast<int>(slice.cols());
    if (rows < 1 || cols < 1) throw Error(ErrorKind::Config, "empty cube slice");
    fftw_plan plan = PlanCache::instance().get(rows, cols);
    Eigen::MatrixXcd in = slice;
    Eigen::MatrixXcd out(rows, cols);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    stack.channels.push_back(std::move(out));
  }
  return stack;
}

NcaMap nca(const RdStack& stack) {
  NcaMap map = NcaMap::Zero(stack.rows(), stack.cols());
  for (const auto& ch : stack.channels) map += ch.cwiseAbs2();
  return map;
}

Complex dirichlet(int len, double x) {
  const double n = static_cast<double>(len);
  // Reduce to [-len/2, len/2): the kernel is len-periodic in x.
  double r = std::fmod(x, n);
  if (r >= n / 2.0) r -= n;
  if (r < -n / 2.0) r += n;
  if (r != 0.0 && r == std::round(r)) return Complex(0.0, 0.0);  // full cycles
  const double phase = std::numbers::pi * r * (n - 1.0) / n;
  const double s = std::sin(std::numbers::pi * r / n);
  double mag;
  if (std::abs(r) < 1e-7) {
    // sin(pi r) / sin(pi r / len) ~ len (1 - (pi r)^2 (1 - 1/len^2) / 6)
    const double pr = std::numbers::pi * r;
    mag = n * (1.0 - pr * pr * (1.0 - 1.0 / (n * n)) / 6.0);
  } else {
    mag = std::sin(std::numbers::pi * r) / s;
  }
  return std::polar(1.0, phase) * mag;
}

}  // namespace ctcfar
