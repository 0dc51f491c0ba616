// OpenMP variants of the data-parallel sweeps. Each output cell depends only on the
// previous iterate, so results match the serial reference bit for bit.

#include <omp.h>

#include <cstddef>
#include <cstdint>

#include "ifp/analysis.hpp"
#include "ifp/policy.hpp"

namespace ifp::kernels {

void policy_sweep_parallel(const EulerOperator& op, const PolicySolution& prev, std::span<double> out,
                           int threads) {
  const auto n = static_cast<std::int64_t>(prev.grid.size());
  const auto total = n * static_cast<std::int64_t>(prev.num_states);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::int64_t k = 0; k < total; ++k) {
    const auto z = static_cast<std::size_t>(k / n);
    const auto i = static_cast<std::size_t>(k % n);
    out[static_cast<std::size_t>(k)] = op.update(prev, prev.grid.points[i], z);
  }
}

void regime_map_parallel(const RegimeMapInput& in, std::span<RegimeCell> out, int threads) {
  const auto ng = static_cast<std::int64_t>(in.gammas.size());
  const auto total = ng * static_cast<std::int64_t>(in.discount_rates.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t k = 0; k < total; ++k) {
    const auto gi = static_cast<std::size_t>(k % ng);
    const auto di = static_cast<std::size_t>(k / ng);
    out[static_cast<std::size_t>(k)] = regime_cell(in, in.gammas[gi], in.discount_rates[di]);
  }
}

}  // namespace ifp::kernels
