#pragma once

#include "linkcert/errors.hpp"
#include "linkcert/model.hpp"
#include "linkcert/pls.hpp"

#include <cstdint>
#include <vector>

namespace linkcert {

struct DiscretizationParams {
  double epsilon = kMachineEpsilon;
  int max_passes = 64;
};

enum class DiscretizationErrorKind {
  ZeroLengthInput,
  CurvesIntersect,
  PassLimitExceeded
};

class DiscretizationError : public LinkcertError {
public:
  DiscretizationError(DiscretizationErrorKind kind,
                      std::vector<std::uint32_t> loops);

  DiscretizationErrorKind kind() const { return kind_; }
  const std::vector<std::uint32_t> &loops() const { return loops_; }

private:
  DiscretizationErrorKind kind_;
  std::vector<std::uint32_t> loops_;
};

struct DiscretizationStats {
  int passes = 0;
  std::size_t input_segments = 0;
  std::size_t output_segments = 0;
};

/// Adaptive chord conversion. Segments whose tight boxes overlap a box of a
/// paired loop are halved until no overlap remains, then replaced by chords.
/// Loops outside every pair become chords of their input segments.
/// `stats`, when given, is filled even if an error is thrown.
std::vector<PolylineLoop> discretize(const CurveModel &model,
                                     const PairList &pairs,
                                     const DiscretizationParams &params = {},
                                     DiscretizationStats *stats = nullptr);

/// Every segment replaced by `pieces` chords of equal parameter width.
std::vector<PolylineLoop> uniform_discretize(const CurveModel &model,
                                             int pieces);

} // namespace linkcert
