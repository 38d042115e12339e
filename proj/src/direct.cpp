#include "linkcert/kernels.hpp"

#include <cmath>
#include <numeric>

namespace linkcert {

namespace {

// Shared pieces of one segment-pair term given the four corner differences
// and their norms.
struct PairTerm {
  double p, d1, d2;
};

inline PairTerm pair_term(const Vec3 &a, const Vec3 &b, const Vec3 &c,
                          const Vec3 &d, double na, double nb, double nc,
                          double nd) {
  const double p = a.dot(b.cross(c));
  const double ca = c.dot(a);
  const double d1 = na * nb * nc + a.dot(b) * nc + b.dot(c) * na + ca * nb;
  const double d2 = na * nd * nc + a.dot(d) * nc + d.dot(c) * na + ca * nd;
  return {p, d1, d2};
}

// +1 when (x, y) lies in the upper half plane or on the negative x axis.
inline int half_plane(double x, double y) {
  return (y > 0.0 || (y == 0.0 && x < 0.0)) ? 1 : -1;
}

} // namespace

double segment_pair_lambda(const Vec3 &l_j, const Vec3 &l_j1, const Vec3 &k_i,
                           const Vec3 &k_i1) {
  const Vec3 a = l_j - k_i;
  const Vec3 b = l_j - k_i1;
  const Vec3 c = l_j1 - k_i1;
  const Vec3 d = l_j1 - k_i;
  const auto t =
      pair_term(a, b, c, d, a.norm(), b.norm(), c.norm(), d.norm());
  return (std::atan2(t.p, t.d1) + std::atan2(t.p, t.d2)) * kInvTwoPi;
}

double link_direct(const PolylineLoop &loop1, const PolylineLoop &loop2,
                   DsVariant variant) {
  const auto &l = loop1.vertices;
  const auto &k = loop2.vertices;
  const std::size_t nl = l.size();
  const std::size_t nk = k.size();
  if (nl == 0 || nk == 0)
    return 0.0;
  std::vector<double> partial(nk, 0.0);
  const auto nk_signed = static_cast<std::ptrdiff_t>(nk);

#pragma omp parallel
  {
    // diff_i[j] = l_j - k_i and diff_i1[j] = l_j - k_{i+1}, with norms, so
    // every vertex difference is normalized once per outer segment.
    std::vector<Vec3> diff_i(nl), diff_i1(nl);
    std::vector<double> norm_i(nl), norm_i1(nl);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nk_signed; ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const Vec3 &ki = k[i];
      const Vec3 &ki1 = k[(i + 1) % nk];
      for (std::size_t j = 0; j < nl; ++j) {
        diff_i[j] = l[j] - ki;
        diff_i1[j] = l[j] - ki1;
        norm_i[j] = diff_i[j].norm();
        norm_i1[j] = diff_i1[j].norm();
      }
      double lambda_i = 0.0;
      if (variant == DsVariant::PerPairAtan) {
        for (std::size_t j = 0; j < nl; ++j) {
          const std::size_t j1 = (j + 1 == nl) ? 0 : j + 1;
          const auto t = pair_term(diff_i[j], diff_i1[j], diff_i1[j1],
                                   diff_i[j1], norm_i[j], norm_i1[j],
                                   norm_i1[j1], norm_i[j1]);
          lambda_i += (std::atan2(t.p, t.d1) + std::atan2(t.p, t.d2)) *
                      kInvTwoPi;
        }
      } else {
        double xs = 1.0, ys = 0.0;
        int S = -1;
        long turns = 0;
        for (std::size_t j = 0; j < nl; ++j) {
          const std::size_t j1 = (j + 1 == nl) ? 0 : j + 1;
          const auto t = pair_term(diff_i[j], diff_i1[j], diff_i1[j1],
                                   diff_i[j1], norm_i[j], norm_i1[j],
                                   norm_i1[j1], norm_i[j1]);
          const double x1 = t.d1 * t.d2 - t.p * t.p;
          const double y1 = t.p * (t.d1 + t.d2);
          const int s1 = half_plane(t.d1, t.p);
          if (s1 * half_plane(t.d2, t.p) > 0 && s1 * half_plane(x1, y1) < 0)
            turns += s1;
          const double x2 = xs * x1 - ys * y1;
          const double y2 = xs * y1 + ys * x1;
          const int s2 = half_plane(x2, y2);
          if (half_plane(x1, y1) * S > 0 && s2 * S < 0)
            turns += S;
          S = s2;
          const double scale = std::max(std::abs(x2), std::abs(y2));
          xs = x2 / scale;
          ys = y2 / scale;
        }
        lambda_i = static_cast<double>(turns) + std::atan2(ys, xs) * kInvTwoPi;
      }
      partial[i] = lambda_i;
    }
  }
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

} // namespace linkcert
