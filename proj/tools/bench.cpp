// Serial reference vs OpenMP kernels on the calibrated GARCH environment.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "CLI11.hpp"

#include "ifp/analysis.hpp"
#include "ifp/policy.hpp"

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    if (dt.count() < best) best = dt.count();
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-16s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark"};
  int threads = omp_get_max_threads();
  int reps = 5;
  std::size_t grid_points = 200;
  app.add_option("--threads", threads)->check(CLI::PositiveNumber);
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  app.add_option("--grid", grid_points)->check(CLI::Range(16, 100000));
  CLI11_PARSE(app, argc, argv);

  const ifp::FigureSettings s;
  const ifp::GarchChain chain = ifp::build_chain(s.garch, s.n_eps, s.n_v);
  const ifp::MarkovEnvironment env = ifp::calibrated_environment(s, chain, 2.0);
  const ifp::Utility u = ifp::Utility::crra(2.0);
  const ifp::EulerOperator op(env, u);
  const ifp::AssetGrid grid = ifp::AssetGrid::exponential(s.a_min, s.a_max, s.grid_median, grid_points);

  // A few sweeps in so that the expectation is not trivially at the seed.
  ifp::PolicySolution prev = ifp::PolicySolution::consume_everything(grid, env.num_states());
  for (int k = 0; k < 5; ++k) {
    ifp::kernels::policy_sweep_serial(op, prev, prev.c);
    prev.refresh_slopes();
  }
  std::vector<double> a(prev.c.size()), b(prev.c.size());
  const double ts = best_of(reps, [&] { ifp::kernels::policy_sweep_serial(op, prev, a); });
  const double tp = best_of(reps, [&] { ifp::kernels::policy_sweep_parallel(op, prev, b, threads); });
  report("policy_sweep", ts, tp, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

  ifp::RegimeMapInput in{chain, s.growth, {}, {}};
  for (std::size_t k = 0; k < 31; ++k) in.gammas.push_back(1.0 + 5.0 * static_cast<double>(k) / 30.0);
  for (std::size_t k = 0; k < 31; ++k) in.discount_rates.push_back((0.005 + 0.295 * static_cast<double>(k) / 30.0) / 12.0);
  std::vector<ifp::RegimeCell> rs(in.gammas.size() * in.discount_rates.size()), rp(rs.size());
  const double ms = best_of(reps, [&] { ifp::kernels::regime_map_serial(in, rs); });
  const double mp = best_of(reps, [&] { ifp::kernels::regime_map_parallel(in, rp, threads); });
  report("regime_map", ms, mp, rs == rp);

  std::printf("threads %d, grid %zu, states %zu\n", threads, grid_points, env.num_states());
  return 0;
}
