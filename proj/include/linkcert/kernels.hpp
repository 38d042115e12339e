#pragma once

#include "linkcert/errors.hpp"
#include "linkcert/model.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace linkcert {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInvTwoPi = 1.0 / (2.0 * kPi);
inline constexpr double kInvFourPi = 1.0 / (4.0 * kPi);

enum class KernelMethod { CountCrossings, DirectSum, BarnesHut };
enum class DsVariant { PerPairAtan, AngleSum };
enum class ExpansionOrder { Dipole, Quadrupole };

struct BarnesHutParams {
  double beta_init = 2.0;
  double beta_max = 10.0;
  double e_target = 0.2;
  double k_const = kInvFourPi;
  ExpansionOrder order = ExpansionOrder::Quadrupole;
  // When false, a single pass at beta_init is run (fixed-beta studies).
  bool adaptive = true;
};

struct CrossingParams {
  std::uint64_t seed = 0;
  int max_retries = 16;
  std::size_t bvh_threshold = 750;
};

struct KernelChoice {
  KernelMethod method = KernelMethod::DirectSum;
  DsVariant ds_variant = DsVariant::AngleSum;
  BarnesHutParams bh;
  CrossingParams cc;
};

// ---------------------------------------------------------------------------
// Direct summation

/// Exact linking contribution of segment l_j -> l_j1 against k_i -> k_i1,
/// (atan2(p, d1) + atan2(p, d2)) / 2pi.
double segment_pair_lambda(const Vec3 &l_j, const Vec3 &l_j1, const Vec3 &k_i,
                           const Vec3 &k_i1);

double link_direct(const PolylineLoop &loop1, const PolylineLoop &loop2,
                   DsVariant variant = DsVariant::AngleSum);

// ---------------------------------------------------------------------------
// Crossing counting

struct CrossingResult {
  std::int64_t value = 0;
  int retries = 0;           // frames rejected as degenerate
  std::int64_t signed_half_crossings = 0;  // sum of +-1 per crossing
};

/// `stream` decorrelates the frame sequence of different loop pairs that
/// share one seed.
CrossingResult count_crossings(const PolylineLoop &loop1,
                               const PolylineLoop &loop2,
                               const CrossingParams &params,
                               std::uint64_t stream = 0);

std::int64_t link_count_crossings(const PolylineLoop &loop1,
                                  const PolylineLoop &loop2,
                                  const CrossingParams &params,
                                  std::uint64_t stream = 0);

// ---------------------------------------------------------------------------
// Barnes-Hut

using Tensor3 = std::array<Mat3, 3>;  // t[i](j, k)

struct MomentNode {
  Aabb box;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 c_m = Vec3::Zero();
  Mat3 c_d = Mat3::Zero();
  Tensor3 c_q{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t segment = 0;  // leaf only

  bool is_leaf() const { return left < 0; }
};

/// Moment-augmented segment hierarchy of one loop. Node 0 is the root.
struct MomentTree {
  std::vector<MomentNode> nodes;
  std::vector<Vec3> seg_start;
  std::vector<Vec3> seg_end;

  const MomentNode &root() const { return nodes.front(); }
  bool empty() const { return nodes.empty(); }
};

MomentTree build_moment_tree(const PolylineLoop &loop);

double frobenius(const Tensor3 &t);

struct FarFieldTerms {
  double monopole = 0.0;
  double dipole = 0.0;
  double quadrupole = 0.0;

  double sum(ExpansionOrder order) const {
    return monopole + dipole +
           (order == ExpansionOrder::Quadrupole ? quadrupole : 0.0);
  }
};

FarFieldTerms far_field_terms(const MomentNode &node1, const MomentNode &node2);
double far_field_eval(const MomentNode &node1, const MomentNode &node2,
                      ExpansionOrder order = ExpansionOrder::Quadrupole);

struct BarnesHutReport {
  double value = 0.0;
  double beta = 0.0;            // beta of the returned evaluation
  double error_estimate = 0.0;  // from the first evaluation
  double beta_t = 0.0;
  bool reran = false;
  std::size_t far_pairs = 0;
  std::size_t near_pairs = 0;
};

/// One dual-tree pass at a fixed beta. Accumulates the next-order error
/// estimate when `error_estimate` is given.
double barnes_hut_pass(const MomentTree &tree1, const MomentTree &tree2,
                       double beta, const BarnesHutParams &params,
                       double *error_estimate = nullptr,
                       std::size_t *far_pairs = nullptr,
                       std::size_t *near_pairs = nullptr);

BarnesHutReport barnes_hut(const MomentTree &tree1, const MomentTree &tree2,
                           const BarnesHutParams &params);

double link_barnes_hut(const MomentTree &tree1, const MomentTree &tree2,
                       const BarnesHutParams &params = {});

// ---------------------------------------------------------------------------
// Dispatch

struct LinkDiagnostics {
  double raw = 0.0;
  bool fell_back = false;
  int cc_retries = 0;
  bool bh_reran = false;
  double bh_beta = 0.0;
  double bh_error_estimate = 0.0;
};

struct LinkResult {
  std::int64_t value = 0;
  LinkDiagnostics diag;
};

/// Rounds a real-valued kernel result. Values further than 0.25 from an
/// integer, or non-finite ones, are replaced by `crossings()`.
std::int64_t resolve_rounding(double raw,
                              const std::function<std::int64_t()> &crossings,
                              LinkDiagnostics &diag);

LinkResult compute_link(const PolylineLoop &loop1, const PolylineLoop &loop2,
                        const KernelChoice &choice, std::uint64_t stream = 0);

/// Variant reusing prebuilt moment trees (BarnesHut only reads them).
LinkResult compute_link(const PolylineLoop &loop1, const PolylineLoop &loop2,
                        const MomentTree *tree1, const MomentTree *tree2,
                        const KernelChoice &choice, std::uint64_t stream = 0);

} // namespace linkcert
