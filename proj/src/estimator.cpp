#include "rwl/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "rwl/errors.hpp"
#include "rwl/rng.hpp"

namespace rwl {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Count, mean and centred sum of squares of a sample; merged in a fixed order.
struct SampleStats {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  static SampleStats of(const Eigen::VectorXd& x) {
    SampleStats s;
    s.count = x.size();
    if (s.count == 0) return s;
    CompensatedSum sum;
    for (double v : x) sum.add(v);
    s.mean = sum.value() / static_cast<double>(s.count);
    CompensatedSum sq;
    for (double v : x) sq.add((v - s.mean) * (v - s.mean));
    s.m2 = sq.value();
    return s;
  }

  void merge(const SampleStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(count) *
                         static_cast<double>(other.count) / total;
    count += other.count;
  }

  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    const double var = m2 / static_cast<double>(count - 1);
    return std::sqrt(var / static_cast<double>(count));
  }
};

// Runs task(b) for b in [0, batches) on up to `threads` workers.
template <class Task>
void run_batches(long batches, int threads, Task&& task) {
  const int workers = static_cast<int>(std::min<long>(std::max(threads, 1), batches));
  if (workers <= 1) {
    for (long b = 0; b < batches; ++b) task(b);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long b = next++; b < batches; b = next++) {
        try {
          task(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Eigen::VectorXd apply(const TestFunction& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) out(k) = test_fn_eval(f, x(k), 0);
  return out;
}

long batch_count(long paths, long batch_size) { return (paths + batch_size - 1) / batch_size; }

}  // namespace

long ExperimentConfig::reference_n() const {
  return ref_factor * *std::max_element(n_list.begin(), n_list.end());
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw ConfigError("n list must not be empty");
  if (ref_factor < 1) throw ConfigError("ref_factor must be >= 1");
  for (long n : n_list) {
    if (n < 1) throw ConfigError("every n must be >= 1");
  }
  const long big_n = reference_n();
  for (long n : n_list) {
    if (big_n % n != 0) {
      throw ConfigError("n=" + std::to_string(n) + " does not divide reference N=" +
                        std::to_string(big_n));
    }
  }
  if (batch_size < 1 || paths < batch_size) {
    throw ConfigError("need paths >= batch_size >= 1");
  }
  if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("a must lie in [0, 1]");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

Eigen::VectorXd simulate_xn(const CoarseView& view, const VolFunction& sigma, HurstParam H) {
  const long n = view.n.value();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(view.dw.rows());
  for (Eigen::Index r = 0; r < view.dw.rows(); ++r) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += sigma(view.y(r, i), view.n.point(i), H) * view.dw(r, i);
    x(r) = acc;
  }
  return x;
}

std::vector<WeakErrorEstimate> estimate_weak_error(const ExperimentConfig& config) {
  config.validate();
  const long big_n = config.reference_n();
  const auto model = std::make_shared<const JointGaussianModel>(
      build_model(GridSize(big_n), config.H, config.quadrature));

  const long batches = batch_count(config.paths, config.batch_size);
  const std::size_t levels = config.n_list.size();
  std::vector<std::vector<SampleStats>> partial(batches, std::vector<SampleStats>(levels));

  run_batches(batches, config.threads, [&](long b) {
    const long count = std::min(config.batch_size, config.paths - b * config.batch_size);
    const PathBatch batch = sample_batch(model, count, hash64(config.seed, b));
    const Eigen::VectorXd x_ref = simulate_xn(coarsen(batch, 1), config.sigma, config.H);
    const Eigen::VectorXd f_ref = apply(config.f, x_ref);
    for (std::size_t k = 0; k < levels; ++k) {
      const long n = config.n_list[k];
      const Eigen::VectorXd x_n = simulate_xn(coarsen(batch, big_n / n), config.sigma, config.H);
      const Eigen::VectorXd mixed = (1.0 - config.a) * x_ref + config.a * x_n;
      partial[b][k] = SampleStats::of(f_ref - apply(config.f, mixed));
    }
  });

  std::vector<WeakErrorEstimate> out;
  for (std::size_t k = 0; k < levels; ++k) {
    SampleStats total;
    for (long b = 0; b < batches; ++b) total.merge(partial[b][k]);
    out.push_back({config.n_list[k], total.mean, total.stderr_of_mean(), total.count,
                   config.seed, big_n});
  }
  return out;
}

MomentEstimate estimate_expected_f(GridSize n, HurstParam H, const VolFunction& sigma,
                                   const TestFunction& f, long paths, std::uint64_t seed,
                                   long batch_size, const QuadratureSpec& q) {
  if (batch_size < 1 || paths < 1) throw ConfigError("need paths >= 1 and batch_size >= 1");
  const auto model = std::make_shared<const JointGaussianModel>(build_model(n, H, q));
  SampleStats total;
  const long batches = batch_count(paths, batch_size);
  for (long b = 0; b < batches; ++b) {
    const long count = std::min(batch_size, paths - b * batch_size);
    const PathBatch batch = sample_batch(model, count, hash64(seed, b));
    total.merge(SampleStats::of(apply(f, simulate_xn(coarsen(batch, 1), sigma, H))));
  }
  return {total.mean, total.stderr_of_mean()};
}

RateFitReport fit_loglog(const std::vector<long>& ns, const std::vector<double>& values) {
  if (ns.size() != values.size()) throw ConfigError("fit needs matching n and value lists");
  if (ns.size() < 2) throw StatisticalError("rate fit needs at least 2 usable points");
  const auto m = static_cast<double>(ns.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 1 || !(values[k] > 0.0)) {
      throw StatisticalError("log-log fit needs n >= 1 and positive values");
    }
    mx += std::log(static_cast<double>(ns[k]));
    my += std::log(values[k]);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double dx = std::log(static_cast<double>(ns[k])) - mx;
    const double dy = std::log(values[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw StatisticalError("rate fit needs at least 2 distinct n");
  RateFitReport report;
  report.slope = sxy / sxx;
  report.intercept = my - report.slope * mx;
  const double ss_res = syy - report.slope * sxy;
  report.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  report.points_used = ns;
  return report;
}

RateFitReport fit_rate(const std::vector<WeakErrorEstimate>& estimates) {
  std::vector<long> ns;
  std::vector<double> values;
  std::vector<RateFitReport::Exclusion> excluded;
  for (const auto& e : estimates) {
    const double magnitude = std::abs(e.estimate);
    if (magnitude == 0.0 || magnitude < 2.0 * e.stderr_) {
      excluded.push_back({e.n, "below noise floor"});
      continue;
    }
    ns.push_back(e.n);
    values.push_back(magnitude);
  }
  if (ns.size() < 2) {
    throw StatisticalError("rate fit needs at least 2 usable points, have " +
                           std::to_string(ns.size()) + " after noise-floor exclusions");
  }
  RateFitReport report = fit_loglog(ns, values);
  report.points_excluded = std::move(excluded);
  return report;
}

}  // namespace rwl
