// Benchmark comparing the OpenMP replication kernels against the serial
// reference implementation on representative workloads.

#include <chrono>
#include <cstdio>

#include "loopsoup/besq.hpp"
#include "loopsoup/experiments.hpp"
#include "loopsoup/loop_soup.hpp"
#include "loopsoup/parallel.hpp"

using namespace loopsoup;

namespace {

struct CountAcc {
  double sum = 0.0;
  void merge(CountAcc&& o) { sum += o.sum; }
};

template <typename Body>
double time_ms(Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main() {
  std::printf("%-34s %10s %12s %12s %8s\n", "kernel", "reps", "serial ms", "parallel ms",
              "speedup");

  const MetricGraph tri = builtin_graph("triangle");
  const SoupSampler sampler = make_soup_sampler(tri);

  {
    const long reps = 200000;
    double check_serial = 0.0, check_parallel = 0.0;
    auto body = [&](CountAcc& a, long, Rng& rng) {
      a.sum += sampler.sample(rng).total_loops();
    };
    const double ts = time_ms([&] {
      check_serial = replicate_serial<CountAcc>(reps, 1, stream::kSoup, body).sum;
    });
    const double tp = time_ms([&] {
      check_parallel = replicate_parallel<CountAcc>(reps, 1, stream::kSoup, body).sum;
    });
    std::printf("%-34s %10ld %12.1f %12.1f %7.2fx  %s\n", "discrete_soup/triangle", reps, ts, tp,
                ts / tp, check_serial == check_parallel ? "(identical)" : "(MISMATCH)");
  }
  {
    const long reps = 50000;
    const std::vector<double> grid = uniform_grid(1.0, 33);
    auto body = [&](CountAcc& a, long, Rng& rng) {
      a.sum += besq_bridge(3, 1.0, 1.0, 1.0, grid, rng).values[16];
    };
    double cs = 0.0, cp = 0.0;
    const double ts =
        time_ms([&] { cs = replicate_serial<CountAcc>(reps, 2, stream::kField, body).sum; });
    const double tp =
        time_ms([&] { cp = replicate_parallel<CountAcc>(reps, 2, stream::kField, body).sum; });
    std::printf("%-34s %10ld %12.1f %12.1f %7.2fx  %s\n", "besq_bridge/dim3_grid33", reps, ts, tp,
                ts / tp, cs == cp ? "(identical)" : "(MISMATCH)");
  }
  {
    const long reps = 20000;
    auto body = [&](CountAcc& a, long, Rng& rng) {
      const DiscreteLoopConfig c = sampler.sample(rng);
      const std::vector<double> times = sample_vertex_local_times(c, tri, rng);
      a.sum += times[0];
    };
    double cs = 0.0, cp = 0.0;
    const double ts =
        time_ms([&] { cs = replicate_serial<CountAcc>(reps, 3, stream::kTimes, body).sum; });
    const double tp =
        time_ms([&] { cp = replicate_parallel<CountAcc>(reps, 3, stream::kTimes, body).sum; });
    std::printf("%-34s %10ld %12.1f %12.1f %7.2fx  %s\n", "soup_with_local_times/triangle", reps,
                ts, tp, ts / tp, cs == cp ? "(identical)" : "(MISMATCH)");
  }
  std::printf("workers: %d\n", worker_count());
  return 0;
}
