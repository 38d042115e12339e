#include "linkcert/bvh.hpp"
#include "linkcert/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace linkcert {

double frobenius(const Tensor3 &t) {
  return std::sqrt(t[0].squaredNorm() + t[1].squaredNorm() +
                   t[2].squaredNorm());
}

MomentTree build_moment_tree(const PolylineLoop &loop) {
  MomentTree tree;
  const std::size_t n = loop.size();
  if (n == 0)
    return tree;
  tree.seg_start.reserve(n);
  tree.seg_end.reserve(n);
  std::vector<Aabb> boxes;
  boxes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    tree.seg_start.push_back(loop.vertices[i]);
    tree.seg_end.push_back(loop.vertex(i + 1));
    boxes.push_back(Aabb::of_points(tree.seg_start.back(), tree.seg_end.back()));
  }
  const BvhTree bvh(boxes, 1);
  tree.nodes.resize(bvh.nodes().size());
  for (std::size_t id = 0; id < bvh.nodes().size(); ++id) {
    const BvhNode &b = bvh.node(id);
    MomentNode &m = tree.nodes[id];
    m.box = b.box;
    m.center = b.box.center();
    m.radius = b.box.radius();
    m.left = b.left;
    m.right = b.right;
    if (b.is_leaf())
      m.segment = bvh.primitive(b.begin);
  }
  // Children always follow their parent in the node array, so a reverse
  // sweep sees both children before the parent.
  for (std::size_t id = tree.nodes.size(); id-- > 0;) {
    MomentNode &m = tree.nodes[id];
    if (m.is_leaf()) {
      const Vec3 s = tree.seg_end[m.segment] - tree.seg_start[m.segment];
      m.c_m = s;
      m.c_d.setZero();
      for (int i = 0; i < 3; ++i)
        m.c_q[i] = (s[i] / 12.0) * s * s.transpose();
      continue;
    }
    m.c_m.setZero();
    m.c_d.setZero();
    for (auto &q : m.c_q)
      q.setZero();
    for (const std::int32_t c : {m.left, m.right}) {
      const MomentNode &ch = tree.nodes[c];
      const Vec3 r = ch.center - m.center;
      m.c_m += ch.c_m;
      m.c_d += ch.c_d + ch.c_m * r.transpose();
      for (int i = 0; i < 3; ++i) {
        const Vec3 di = ch.c_d.row(i).transpose();
        m.c_q[i] += ch.c_q[i] + di * r.transpose() + r * di.transpose() +
                    ch.c_m[i] * r * r.transpose();
      }
    }
  }
  return tree;
}

FarFieldTerms far_field_terms(const MomentNode &n1, const MomentNode &n2) {
  FarFieldTerms out;
  const Vec3 r = n2.center - n1.center;
  const double r2 = r.squaredNorm();
  const double rn = std::sqrt(r2);
  const double inv_r3 = 1.0 / (r2 * rn);
  const double inv_r5 = inv_r3 / r2;
  const double inv_r7 = inv_r5 / r2;

  // First derivative of the Green's function contracted with c_M1 x c_M2.
  out.monopole = -kInvFourPi * inv_r3 * r.dot(n1.c_m.cross(n2.c_m));

  // P(:, j) = c_M1 x C_D2(:, j) - C_D1(:, j) x c_M2.
  Mat3 P;
  for (int j = 0; j < 3; ++j)
    P.col(j) = n1.c_m.cross(n2.c_d.col(j)) - n1.c_d.col(j).cross(n2.c_m);
  // sum_ij (delta_ij r^2 - 3 r_i r_j) P_ij / (4 pi r^5)
  out.dipole =
      -kInvFourPi * inv_r5 * (r2 * P.trace() - 3.0 * r.dot(P * r));

  // T(:, j, k) = c_M1 x C_Q2(:, j, k) + C_Q1(:, j, k) x c_M2
  //            - C_D1(:, k) x C_D2(:, j) - C_D1(:, j) x C_D2(:, k)
  Tensor3 T;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      const Vec3 q2(n2.c_q[0](j, k), n2.c_q[1](j, k), n2.c_q[2](j, k));
      const Vec3 q1(n1.c_q[0](j, k), n1.c_q[1](j, k), n1.c_q[2](j, k));
      const Vec3 v = n1.c_m.cross(q2) + q1.cross(n2.c_m) -
                     n1.c_d.col(k).cross(n2.c_d.col(j)) -
                     n1.c_d.col(j).cross(n2.c_d.col(k));
      for (int i = 0; i < 3; ++i)
        T[i](j, k) = v[i];
    }
  }
  // Third derivative contracted with T:
  // [-3 r^2 (T_iik r_k + T_iji r_j + T_ijj r_i) + 15 T_ijk r_i r_j r_k]
  //   / (4 pi r^7)
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (int i = 0; i < 3; ++i) {
    s1 += T[i].row(i).dot(r);
    s2 += T[i].col(i).dot(r);
    s3 += r[i] * T[i].trace();
    s4 += r[i] * r.dot(T[i] * r);
  }
  const double contraction =
      kInvFourPi * inv_r7 * (-3.0 * r2 * (s1 + s2 + s3) + 15.0 * s4);
  out.quadrupole = -0.5 * contraction;
  return out;
}

double far_field_eval(const MomentNode &n1, const MomentNode &n2,
                      ExpansionOrder order) {
  return far_field_terms(n1, n2).sum(order);
}

namespace {

struct Pass {
  const MomentTree &t1;
  const MomentTree &t2;
  double beta;
  const BarnesHutParams &params;
  bool estimate;
  double error = 0.0;
  std::size_t far = 0;
  std::size_t near = 0;

  double error_term(const MomentNode &a, const MomentNode &b) const {
    const double r = (b.center - a.center).norm();
    const double qa = frobenius(a.c_q);
    const double qb = frobenius(b.c_q);
    const double r5 = r * r * r * r * r;
    return (a.radius * b.c_m.norm() * qa + b.radius * a.c_m.norm() * qb +
            3.0 * (a.c_d.norm() * qb + qa * b.c_d.norm())) /
           r5;
  }

  double run(std::int32_t i1, std::int32_t i2) {
    const MomentNode &a = t1.nodes[i1];
    const MomentNode &b = t2.nodes[i2];
    if ((a.center - b.center).norm() > beta * (a.radius + b.radius)) {
      ++far;
      if (estimate)
        error += error_term(a, b);
      return far_field_eval(a, b, params.order);
    }
    if (a.is_leaf() && b.is_leaf()) {
      ++near;
      return segment_pair_lambda(t1.seg_start[a.segment], t1.seg_end[a.segment],
                                 t2.seg_start[b.segment],
                                 t2.seg_end[b.segment]);
    }
    if (!a.is_leaf() && (b.is_leaf() || a.radius > b.radius))
      return run(a.left, i2) + run(a.right, i2);
    return run(i1, b.left) + run(i1, b.right);
  }
};

} // namespace

double barnes_hut_pass(const MomentTree &tree1, const MomentTree &tree2,
                       double beta, const BarnesHutParams &params,
                       double *error_estimate, std::size_t *far_pairs,
                       std::size_t *near_pairs) {
  if (tree1.empty() || tree2.empty())
    return 0.0;
  Pass pass{tree1, tree2, beta, params, error_estimate != nullptr};
  const double value = pass.run(0, 0);
  if (error_estimate)
    *error_estimate = params.k_const * pass.error;
  if (far_pairs)
    *far_pairs = pass.far;
  if (near_pairs)
    *near_pairs = pass.near;
  return value;
}

BarnesHutReport barnes_hut(const MomentTree &tree1, const MomentTree &tree2,
                           const BarnesHutParams &params) {
  BarnesHutReport rep;
  rep.beta = params.beta_init;
  rep.value = barnes_hut_pass(tree1, tree2, params.beta_init, params,
                              &rep.error_estimate, &rep.far_pairs,
                              &rep.near_pairs);
  rep.beta_t =
      std::pow(rep.error_estimate / params.e_target, 0.25) * params.beta_init;
  if (params.adaptive && rep.beta_t > params.beta_init) {
    rep.reran = true;
    rep.beta = std::min(rep.beta_t, params.beta_max);
    rep.value = barnes_hut_pass(tree1, tree2, rep.beta, params, nullptr,
                                &rep.far_pairs, &rep.near_pairs);
  }
  return rep;
}

double link_barnes_hut(const MomentTree &tree1, const MomentTree &tree2,
                       const BarnesHutParams &params) {
  return barnes_hut(tree1, tree2, params).value;
}

} // namespace linkcert
