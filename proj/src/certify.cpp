#include "linkcert/certify.hpp"

#include <nlohmann/json.hpp>
#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <map>
#include <sstream>

namespace linkcert {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class ThreadScope {
public:
  explicit ThreadScope(int threads) : saved_(omp_get_max_threads()) {
    if (threads > 0)
      omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope &) = delete;
  ThreadScope &operator=(const ThreadScope &) = delete;

private:
  int saved_;
};

// Polylines and (for Barnes-Hut) moment trees of the loops that take part
// in at least one pair.
struct Prepared {
  std::vector<PolylineLoop> polylines;
  std::vector<MomentTree> trees;
};

Prepared prepare(const CurveModel &model, const PairList &pairs,
                 const KernelChoice &choice, const PipelineOptions &options,
                 LinkMatrix &info) {
  Prepared prep;
  auto t0 = Clock::now();
  DiscretizationStats stats;
  prep.polylines =
      discretize(model, pairs, options.discretization, &stats);
  info.discretization_passes = stats.passes;
  info.discretized_segments = stats.output_segments;
  if (choice.method == KernelMethod::BarnesHut) {
    std::vector<char> used(model.size(), 0);
    for (const auto &[i, j] : pairs.pairs)
      used[i] = used[j] = 1;
    prep.trees.resize(model.size());
    const auto n = static_cast<std::ptrdiff_t>(model.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      if (used[i])
        prep.trees[i] = build_moment_tree(prep.polylines[i]);
  }
  info.timings.discretize = seconds_since(t0);
  return prep;
}

LinkResult evaluate_pair(const Prepared &prep, const KernelChoice &choice,
                         std::uint32_t i, std::uint32_t j) {
  const MomentTree *ti = prep.trees.empty() ? nullptr : &prep.trees[i];
  const MomentTree *tj = prep.trees.empty() ? nullptr : &prep.trees[j];
  return compute_link(prep.polylines[i], prep.polylines[j], ti, tj, choice,
                      pair_stream(i, j));
}

[[noreturn]] void rethrow_pair_error(std::uint32_t i, std::uint32_t j,
                                     const std::string &what) {
  throw KernelError("loops " + std::to_string(i) + " and " +
                    std::to_string(j) + ": " + what);
}

void classify(VerificationReport &rep, const LinkChange &c) {
  if (c.reference == c.computed)
    return;
  if (c.computed == 0)
    rep.destroyed.push_back(c);
  else if (c.reference == 0)
    rep.created.push_back(c);
  else
    rep.changed.push_back(c);
}

json change_json(const LinkChange &c) {
  return json::array({c.i, c.j, c.reference, c.computed});
}

} // namespace

std::int64_t LinkMatrix::lookup(std::uint32_t i, std::uint32_t j) const {
  if (i > j)
    std::swap(i, j);
  const LinkEntry key{i, j, 0};
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const LinkEntry &a, const LinkEntry &b) {
                               return std::tie(a.i, a.j) < std::tie(b.i, b.j);
                             });
  return (it != entries.end() && it->i == i && it->j == j) ? it->lambda : 0;
}

std::size_t LinkMatrix::fallback_count() const {
  return static_cast<std::size_t>(
      std::count_if(diagnostics.begin(), diagnostics.end(),
                    [](const PairDiagnostics &d) { return d.link.fell_back; }));
}

int LinkMatrix::max_cc_retries() const {
  int best = 0;
  for (const auto &d : diagnostics)
    best = std::max(best, d.link.cc_retries);
  return best;
}

std::string kernel_tag(KernelMethod method) {
  switch (method) {
  case KernelMethod::CountCrossings:
    return "cc";
  case KernelMethod::DirectSum:
    return "ds";
  case KernelMethod::BarnesHut:
    return "bh";
  }
  return "?";
}

KernelMethod kernel_from_tag(const std::string &tag) {
  if (tag == "cc")
    return KernelMethod::CountCrossings;
  if (tag == "ds")
    return KernelMethod::DirectSum;
  if (tag == "bh")
    return KernelMethod::BarnesHut;
  throw ParseError("unknown kernel \"" + tag + "\"");
}

LinkMatrix compute_linking_matrix(const CurveModel &model,
                                  const KernelChoice &choice,
                                  const PairSet &excluded,
                                  const PipelineOptions &options) {
  ThreadScope threads(options.threads);
  LinkMatrix m;
  m.num_loops = model.size();
  m.kernel_tag = kernel_tag(choice.method);
  m.model_digest = model_digest(model);

  auto t0 = Clock::now();
  const PairList pairs = potential_link_search(model, excluded);
  m.timings.pls = seconds_since(t0);
  m.pair_count = pairs.size();

  const Prepared prep = prepare(model, pairs, choice, options, m);

  t0 = Clock::now();
  const auto np = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<LinkResult> results(pairs.size());
  std::vector<std::string> errors(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < np; ++k) {
    const auto [i, j] = pairs.pairs[k];
    try {
      results[k] = evaluate_pair(prep, choice, i, j);
    } catch (const std::exception &e) {
      errors[k] = e.what();
      if (errors[k].empty())
        errors[k] = "kernel failure";
    }
  }
  m.timings.kernel = seconds_since(t0);

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs.pairs[k];
    if (!errors[k].empty())
      rethrow_pair_error(i, j, errors[k]);
    m.diagnostics.push_back({i, j, results[k].diag});
    if (results[k].value != 0)
      m.entries.push_back({i, j, results[k].value});
  }
  return m;
}

VerificationReport verify(const CurveModel &model, const LinkMatrix &reference,
                          const KernelChoice &choice, bool early_exit,
                          const PairSet &excluded,
                          const PipelineOptions &options) {
  VerificationReport rep;
  if (reference.num_loops != model.size()) {
    rep.status = VerifyStatus::Fail;
    rep.explanation = "loop count mismatch: certificate has " +
                      std::to_string(reference.num_loops) +
                      " loops, model has " + std::to_string(model.size());
    return rep;
  }
  if (!reference.model_digest.empty() &&
      reference.model_digest != model_digest(model))
    rep.warnings.push_back("model digest differs from the certificate");

  ThreadScope threads(options.threads);
  const PairList pairs = potential_link_search(model, excluded);

  // Evaluation order: reference pairs first, then newly listed pairs.
  std::vector<LoopPair> order;
  std::vector<char> in_pls;
  for (const auto &e : reference.entries) {
    order.emplace_back(e.i, e.j);
    in_pls.push_back(pairs.contains({e.i, e.j}));
  }
  for (const auto &p : pairs.pairs) {
    if (reference.lookup(p.first, p.second) == 0) {
      order.push_back(p);
      in_pls.push_back(1);
    }
  }

  LinkMatrix info;
  const Prepared prep = prepare(model, pairs, choice, options, info);

  const auto n = static_cast<std::ptrdiff_t>(order.size());
  constexpr std::ptrdiff_t kNone = std::numeric_limits<std::ptrdiff_t>::max();
  std::atomic<std::ptrdiff_t> first_bad{kNone};
  std::vector<std::int64_t> computed(order.size(), 0);
  std::vector<char> evaluated(order.size(), 0);
  std::vector<std::string> errors(order.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (early_exit && k > first_bad.load(std::memory_order_relaxed))
      continue;
    const auto [i, j] = order[k];
    try {
      computed[k] = in_pls[k] ? evaluate_pair(prep, choice, i, j).value : 0;
    } catch (const std::exception &e) {
      errors[k] = e.what();
      if (errors[k].empty())
        errors[k] = "kernel failure";
    }
    evaluated[k] = 1;
    if (early_exit && errors[k].empty() &&
        computed[k] != reference.lookup(i, j)) {
      std::ptrdiff_t cur = first_bad.load();
      while (k < cur && !first_bad.compare_exchange_weak(cur, k)) {
      }
    }
  }

  const std::ptrdiff_t stop = early_exit ? first_bad.load() : kNone;
  for (std::ptrdiff_t k = 0; k < n && k <= stop; ++k) {
    if (!evaluated[k])
      continue;
    ++rep.pairs_evaluated;
    const auto [i, j] = order[k];
    if (!errors[k].empty())
      rethrow_pair_error(i, j, errors[k]);
    if (early_exit && k != stop)
      continue;
    classify(rep, {i, j, reference.lookup(i, j), computed[k]});
  }

  if (early_exit && stop != kNone) {
    const auto [i, j] = order[stop];
    rep.first_failure = LinkChange{i, j, reference.lookup(i, j), computed[stop]};
    rep.status = VerifyStatus::Aborted;
  } else {
    const bool clean =
        rep.destroyed.empty() && rep.created.empty() && rep.changed.empty();
    rep.status = clean ? VerifyStatus::Pass : VerifyStatus::Fail;
  }
  auto by_pair = [](const LinkChange &a, const LinkChange &b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  };
  std::sort(rep.destroyed.begin(), rep.destroyed.end(), by_pair);
  std::sort(rep.created.begin(), rep.created.end(), by_pair);
  std::sort(rep.changed.begin(), rep.changed.end(), by_pair);
  return rep;
}

VerificationReport diff_matrices(const LinkMatrix &reference,
                                 const LinkMatrix &computed) {
  VerificationReport rep;
  if (reference.num_loops != computed.num_loops) {
    rep.status = VerifyStatus::Fail;
    rep.explanation = "loop count mismatch: " +
                      std::to_string(reference.num_loops) + " vs " +
                      std::to_string(computed.num_loops);
    return rep;
  }
  std::map<LoopPair, std::pair<std::int64_t, std::int64_t>> all;
  for (const auto &e : reference.entries)
    all[{e.i, e.j}].first = e.lambda;
  for (const auto &e : computed.entries)
    all[{e.i, e.j}].second = e.lambda;
  for (const auto &[p, v] : all)
    classify(rep, {p.first, p.second, v.first, v.second});
  rep.pairs_evaluated = all.size();
  const bool clean =
      rep.destroyed.empty() && rep.created.empty() && rep.changed.empty();
  rep.status = clean ? VerifyStatus::Pass : VerifyStatus::Fail;
  if (!reference.model_digest.empty() && !computed.model_digest.empty() &&
      reference.model_digest != computed.model_digest)
    rep.warnings.push_back("certificates were computed from different models");
  return rep;
}

std::string serialize_matrix(const LinkMatrix &m) {
  json entries = json::array();
  for (const auto &e : m.entries)
    entries.push_back(json::array({e.i, e.j, e.lambda}));
  json doc;
  doc["num_loops"] = m.num_loops;
  doc["digest"] = m.model_digest;
  doc["kernel"] = m.kernel_tag;
  doc["entries"] = entries;
  return doc.dump();
}

LinkMatrix parse_matrix(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("certificate: ") + e.what());
  }
  LinkMatrix m;
  try {
    if (!doc.is_object())
      throw ParseError("certificate: expected an object");
    const auto &nl = doc.at("num_loops");
    if (!nl.is_number_unsigned())
      throw ParseError("certificate: num_loops must be a non-negative integer");
    m.num_loops = nl.get<std::size_t>();
    m.model_digest = doc.value("digest", std::string());
    m.kernel_tag = doc.value("kernel", std::string());
    for (const auto &e : doc.at("entries")) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_number_integer())
        throw ParseError("certificate: entry must be [i, j, lambda]");
      const auto i = e[0].get<std::int64_t>();
      const auto j = e[1].get<std::int64_t>();
      const auto lambda = e[2].get<std::int64_t>();
      if (i < 0 || i >= j)
        throw ParseError("certificate: entry needs 0 <= i < j");
      if (static_cast<std::size_t>(j) >= m.num_loops)
        throw ParseError("certificate: loop index out of range");
      if (lambda == 0)
        throw ParseError("certificate: zero entries are not stored");
      LinkEntry entry{static_cast<std::uint32_t>(i),
                      static_cast<std::uint32_t>(j), lambda};
      if (!m.entries.empty() && !(std::tie(m.entries.back().i,
                                           m.entries.back().j) <
                                  std::tie(entry.i, entry.j)))
        throw ParseError("certificate: entries must be sorted and unique");
      m.entries.push_back(entry);
    }
  } catch (const json::exception &e) {
    throw ParseError(std::string("certificate: ") + e.what());
  }
  return m;
}

std::string status_name(VerifyStatus s) {
  switch (s) {
  case VerifyStatus::Pass:
    return "pass";
  case VerifyStatus::Fail:
    return "fail";
  case VerifyStatus::Aborted:
    return "aborted";
  }
  return "?";
}

std::string report_to_json(const VerificationReport &r) {
  json doc;
  doc["status"] = status_name(r.status);
  for (const auto &[key, list] :
       {std::pair{"destroyed", &r.destroyed}, std::pair{"created", &r.created},
        std::pair{"changed", &r.changed}}) {
    json arr = json::array();
    for (const auto &c : *list)
      arr.push_back(change_json(c));
    doc[key] = arr;
  }
  doc["first_failure"] =
      r.first_failure ? change_json(*r.first_failure) : json(nullptr);
  doc["warnings"] = r.warnings;
  doc["explanation"] = r.explanation;
  doc["pairs_evaluated"] = r.pairs_evaluated;
  return doc.dump();
}

std::string report_to_text(const VerificationReport &r) {
  std::ostringstream out;
  out << "status: " << status_name(r.status) << '\n';
  if (!r.explanation.empty())
    out << "explanation: " << r.explanation << '\n';
  for (const auto &w : r.warnings)
    out << "warning: " << w << '\n';
  auto dump = [&](const char *name, const std::vector<LinkChange> &list) {
    for (const auto &c : list)
      out << name << " loops " << c.i << " " << c.j << ": " << c.reference
          << " -> " << c.computed << '\n';
  };
  dump("DESTROYED", r.destroyed);
  dump("CREATED", r.created);
  dump("CHANGED", r.changed);
  if (r.first_failure)
    out << "first failure: loops " << r.first_failure->i << " "
        << r.first_failure->j << '\n';
  out << "pairs evaluated: " << r.pairs_evaluated << '\n';
  return out.str();
}

} // namespace linkcert
