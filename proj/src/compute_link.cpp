#include "linkcert/kernels.hpp"

#include <cmath>

namespace linkcert {

std::int64_t resolve_rounding(double raw,
                              const std::function<std::int64_t()> &crossings,
                              LinkDiagnostics &diag) {
  diag.raw = raw;
  if (std::isfinite(raw)) {
    const double nearest = std::nearbyint(raw);
    if (std::abs(raw - nearest) <= 0.25)
      return static_cast<std::int64_t>(nearest);
  }
  diag.fell_back = true;
  return crossings();
}

LinkResult compute_link(const PolylineLoop &loop1, const PolylineLoop &loop2,
                        const MomentTree *tree1, const MomentTree *tree2,
                        const KernelChoice &choice, std::uint64_t stream) {
  LinkResult out;
  auto crossings = [&]() -> std::int64_t {
    const auto cc = count_crossings(loop1, loop2, choice.cc, stream);
    out.diag.cc_retries = cc.retries;
    return cc.value;
  };
  switch (choice.method) {
  case KernelMethod::CountCrossings:
    out.value = crossings();
    out.diag.raw = static_cast<double>(out.value);
    break;
  case KernelMethod::DirectSum:
    out.value = resolve_rounding(link_direct(loop1, loop2, choice.ds_variant),
                                 crossings, out.diag);
    break;
  case KernelMethod::BarnesHut: {
    MomentTree own1, own2;
    if (!tree1) {
      own1 = build_moment_tree(loop1);
      tree1 = &own1;
    }
    if (!tree2) {
      own2 = build_moment_tree(loop2);
      tree2 = &own2;
    }
    const auto rep = barnes_hut(*tree1, *tree2, choice.bh);
    out.diag.bh_reran = rep.reran;
    out.diag.bh_beta = rep.beta;
    out.diag.bh_error_estimate = rep.error_estimate;
    out.value = resolve_rounding(rep.value, crossings, out.diag);
    break;
  }
  }
  return out;
}

LinkResult compute_link(const PolylineLoop &loop1, const PolylineLoop &loop2,
                        const KernelChoice &choice, std::uint64_t stream) {
  return compute_link(loop1, loop2, nullptr, nullptr, choice, stream);
}

} // namespace linkcert
