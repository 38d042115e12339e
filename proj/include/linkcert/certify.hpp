#pragma once

#include "linkcert/discretize.hpp"
#include "linkcert/kernels.hpp"
#include "linkcert/model.hpp"
#include "linkcert/pls.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linkcert {

struct LinkEntry {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::int64_t lambda = 0;

  friend bool operator==(const LinkEntry &, const LinkEntry &) = default;
  friend auto operator<=>(const LinkEntry &, const LinkEntry &) = default;
};

struct PairDiagnostics {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  LinkDiagnostics link;
};

struct StageTimings {
  double pls = 0.0;
  double discretize = 0.0;
  double kernel = 0.0;
};

/// Sparse strictly upper triangular certificate. Only `num_loops`,
/// `entries`, `model_digest` and `kernel_tag` are serialized.
struct LinkMatrix {
  std::size_t num_loops = 0;
  std::vector<LinkEntry> entries;  // i < j, lambda != 0, sorted
  std::string model_digest;
  std::string kernel_tag;

  // Run information, not part of the certificate.
  std::vector<PairDiagnostics> diagnostics;
  StageTimings timings;
  std::size_t pair_count = 0;
  int discretization_passes = 0;
  std::size_t discretized_segments = 0;

  std::int64_t lookup(std::uint32_t i, std::uint32_t j) const;
  std::size_t fallback_count() const;
  int max_cc_retries() const;
};

struct PipelineOptions {
  int threads = 0;  // 0: OpenMP default
  DiscretizationParams discretization;
};

std::string kernel_tag(KernelMethod method);
KernelMethod kernel_from_tag(const std::string &tag);

/// Loop-pair stream id used to seed crossing-counting frames.
inline std::uint64_t pair_stream(std::uint32_t i, std::uint32_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

LinkMatrix compute_linking_matrix(const CurveModel &model,
                                  const KernelChoice &choice,
                                  const PairSet &excluded = {},
                                  const PipelineOptions &options = {});

struct LinkChange {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::int64_t reference = 0;
  std::int64_t computed = 0;

  friend bool operator==(const LinkChange &, const LinkChange &) = default;
};

enum class VerifyStatus { Pass, Fail, Aborted };

struct VerificationReport {
  VerifyStatus status = VerifyStatus::Pass;
  std::vector<LinkChange> destroyed;  // reference nonzero, now zero
  std::vector<LinkChange> created;    // reference zero, now nonzero
  std::vector<LinkChange> changed;    // both nonzero, different
  std::optional<LinkChange> first_failure;
  std::vector<std::string> warnings;
  std::string explanation;
  std::size_t pairs_evaluated = 0;

  bool passed() const { return status == VerifyStatus::Pass; }
};

VerificationReport verify(const CurveModel &model, const LinkMatrix &reference,
                          const KernelChoice &choice, bool early_exit,
                          const PairSet &excluded = {},
                          const PipelineOptions &options = {});

/// Differences between two certificates, classified like verify().
VerificationReport diff_matrices(const LinkMatrix &reference,
                                 const LinkMatrix &computed);

std::string serialize_matrix(const LinkMatrix &m);
LinkMatrix parse_matrix(const std::string &text);

std::string status_name(VerifyStatus s);
std::string report_to_json(const VerificationReport &r);
std::string report_to_text(const VerificationReport &r);

} // namespace linkcert
