// Benchmark: OpenMP sampler vs the serial reference on a Table-D.1-sized
// workload, verifying that both produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "qmux/multiserver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_result(const qmux::hub::SamplerResult& a, const qmux::hub::SamplerResult& b) {
  return a.n_success == b.n_success && a.n_rounds == b.n_rounds && a.rate == b.rate &&
         a.mean_attempts == b.mean_attempts && a.stderr_rate == b.stderr_rate;
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t rounds = argc > 1 ? std::atoll(argv[1]) : 2000000;

  qmux::hub::SamplerConfig cfg;
  cfg.hub.servers = 4;
  cfg.hub.qubits = 3;
  cfg.hub.p_server_client = 1e-3;
  cfg.hub.p_server_server = 0.44;
  cfg.hub.cutoff_active = 1000;
  cfg.hub.cutoff_idle = 100000;
  cfg.hub.tau_e = 300e-9;
  cfg.hub.tau_ce = 20e-3;
  cfg.hub.tau_co = 2.8;
  cfg.hub.f0_rsp = 0.9988;
  cfg.hub.f0_eg = 0.999;
  cfg.rounds = rounds;
  cfg.seed = 0xfeedbeef;
  cfg.f_min = 0.0;

  std::printf("sampler benchmark: M=%d s=%d N=%lld\n", cfg.hub.servers, cfg.hub.qubits,
              static_cast<long long>(rounds));

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = qmux::hub::run_sampler_serial(cfg);
  const double t_serial = seconds_since(t0);
  std::printf("  serial:   %.3f s  rate=%.6e +- %.1e\n", t_serial, serial.rate,
              serial.stderr_rate);

  t0 = std::chrono::steady_clock::now();
  const auto parallel = qmux::hub::run_sampler(cfg);
  const double t_parallel = seconds_since(t0);
#ifdef _OPENMP
  std::printf("  openmp:   %.3f s  rate=%.6e  (%d threads, speedup %.2fx)\n", t_parallel,
              parallel.rate, omp_get_max_threads(), t_serial / t_parallel);
#else
  std::printf("  parallel: %.3f s  rate=%.6e  (built without OpenMP)\n", t_parallel,
              parallel.rate);
#endif

  if (!same_result(serial, parallel)) {
    std::printf("MISMATCH between serial and parallel results\n");
    return 1;
  }
  std::printf("  results identical\n");
  return 0;
}
