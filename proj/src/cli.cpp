#include "linkcert/cli.hpp"

#include "linkcert/braid.hpp"
#include "linkcert/certify.hpp"
#include "linkcert/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace linkcert {

using nlohmann::json;

namespace {

struct RawOptions {
  std::string kernel = "ds";
  std::string ds_variant = "anglesum";
  std::string order = "quad";
  std::string format = "text";
  std::string scenario;
  std::string kernels = "ds,cc,bh";
  std::string beta_sweep;
  std::optional<int> threads;
  bool catmull_rom = false;
};

void add_kernel_options(CLI::App *sub, CliConfig &c, RawOptions &raw) {
  sub->add_option("--kernel", raw.kernel, "cc, ds or bh")
      ->check(CLI::IsMember({"cc", "ds", "bh"}));
  sub->add_option("--ds-variant", raw.ds_variant, "atan or anglesum")
      ->check(CLI::IsMember({"atan", "anglesum"}));
  sub->add_option("--beta-init", c.kernel.bh.beta_init);
  sub->add_option("--beta-max", c.kernel.bh.beta_max);
  sub->add_option("--e-target", c.kernel.bh.e_target);
  sub->add_option("--order", raw.order, "dipole or quad")
      ->check(CLI::IsMember({"dipole", "quad"}));
  sub->add_option("--seed", c.kernel.cc.seed, "crossing-count frame seed");
  sub->add_option("--threads", raw.threads,
                  "worker threads (default LINKCERT_THREADS or all cores)");
  sub->add_option("--format", raw.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

void add_scenario_options(CLI::App *sub, CliConfig &c, RawOptions &raw) {
  sub->add_option("--n", c.scenario.n, "total segment count (0: default)");
  sub->add_option("--T", c.scenario.T);
  sub->add_option("--P", c.scenario.P);
  sub->add_option("--lambda", c.scenario.lambda);
  sub->add_option("--L", c.scenario.L);
  sub->add_option("--nu", c.scenario.nu);
  sub->add_option("--count", c.scenario.count);
  sub->add_option("--scenario-seed", c.scenario.seed);
  sub->add_option("--jitter", c.scenario.jitter);
  sub->add_flag("--catmull-rom", raw.catmull_rom);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

int resolve_threads(const std::optional<int> &flag) {
  if (flag)
    return std::max(0, *flag);
  if (const char *env = std::getenv("LINKCERT_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (const std::exception &) {
      throw ParseError(std::string("LINKCERT_THREADS is not an integer: ") +
                       env);
    }
  }
  return 0;
}

struct LoadedModel {
  CurveModel model;
  PairSet excluded;
  std::optional<ClosureTemplate> closure;
};

bool is_braid_file(const std::string &path, const std::string &text) {
  if (format_from_path(path) != ModelFormat::JsonCurves)
    return false;
  try {
    const json doc = json::parse(text);
    return doc.is_object() && doc.contains("braid");
  } catch (const json::exception &) {
    return false;
  }
}

// Braid inputs are closed here; `sidecar` names a stored closure to reuse.
LoadedModel load_input(const std::string &path, const std::string &sidecar) {
  LoadedModel out;
  const std::string text = read_file(path);
  if (is_braid_file(path, text)) {
    const BraidModel b = parse_braid_json(text);
    const ClosedBraid cb =
        (!sidecar.empty() && std::filesystem::exists(sidecar))
            ? reclose_braid(b, parse_closure(read_file(sidecar)))
            : close_braid(b);
    out.model = cb.model;
    out.excluded = cb.excluded;
    out.closure = cb.closure;
    return out;
  }
  out.model = format_from_path(path) == ModelFormat::JsonCurves
                  ? parse_json_curves(text)
                  : parse_polyline_text(text);
  return out;
}

PipelineOptions pipeline_options(const CliConfig &c) {
  PipelineOptions o;
  o.threads = c.threads;
  return o;
}

std::size_t total_segments(const CurveModel &m) {
  std::size_t n = 0;
  for (const auto &l : m.loops)
    n += l.size();
  return n;
}

json diagnostics_json(const LinkMatrix &m) {
  json arr = json::array();
  for (const auto &d : m.diagnostics) {
    json e = {{"i", d.i},
              {"j", d.j},
              {"raw", d.link.raw},
              {"fell_back", d.link.fell_back},
              {"cc_retries", d.link.cc_retries}};
    if (m.kernel_tag == "bh") {
      e["bh_beta"] = d.link.bh_beta;
      e["bh_reran"] = d.link.bh_reran;
      e["bh_error_estimate"] = d.link.bh_error_estimate;
    }
    arr.push_back(e);
  }
  return arr;
}

std::size_t bh_reruns(const LinkMatrix &m) {
  return static_cast<std::size_t>(
      std::count_if(m.diagnostics.begin(), m.diagnostics.end(),
                    [](const PairDiagnostics &d) { return d.link.bh_reran; }));
}

std::string sibling_path(const std::string &model_path, const std::string &suffix) {
  std::filesystem::path p(model_path);
  return (p.parent_path() / p.stem()).string() + suffix;
}

int report_error(std::ostream &err, const std::exception &e) {
  err << "error: " << e.what() << '\n';
  return kExitError;
}

} // namespace

std::string closure_path(const std::string &certificate_path) {
  return certificate_path + ".closure.json";
}

CliConfig parse_cli(const std::vector<std::string> &args, std::string *help) {
  CliConfig c;
  RawOptions raw;
  CLI::App app{"Linking-number certificates for closed 3D curves", "linkcert"};
  app.require_subcommand(1);

  auto *compute = app.add_subcommand("compute", "compute a certificate");
  compute->add_option("model", c.input, "model file")->required();
  compute->add_option("-o,--output", c.output,
                      "certificate path (default <model>.cert.json)");
  add_kernel_options(compute, c, raw);

  auto *verify_cmd =
      app.add_subcommand("verify", "check a model against a certificate");
  verify_cmd->add_option("model", c.input, "model file")->required();
  verify_cmd->add_option("certificate", c.reference, "reference certificate")
      ->required();
  verify_cmd->add_flag("--early-exit", c.early_exit,
                       "stop at the first mismatching pair");
  add_kernel_options(verify_cmd, c, raw);

  auto *diff = app.add_subcommand("diff", "compare two certificates");
  diff->add_option("reference", c.input)->required();
  diff->add_option("other", c.reference)->required();
  diff->add_option("--format", raw.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  auto *gen = app.add_subcommand("gen", "generate a synthetic scenario");
  gen->add_option("scenario", raw.scenario,
                  "hopf, unlinked, torus, ribbon, grid, woundball, perturbed")
      ->required();
  gen->add_option("-o,--output", c.output, "model path")->required();
  gen->add_option("--expected", c.expected,
                  "expected certificate path (default <model>.expected.json)");
  add_scenario_options(gen, c, raw);

  auto *bench = app.add_subcommand("bench", "time kernels, emit CSV");
  bench->add_option("--scenario", raw.scenario, "generated input");
  bench->add_option("--input", c.input, "model file instead of a scenario");
  bench->add_option("--expected", c.expected,
                    "expected certificate for --input");
  bench->add_option("--kernels", raw.kernels, "comma list of cc, ds, bh");
  bench->add_option("--beta-sweep", raw.beta_sweep,
                    "comma list of fixed beta values (Barnes-Hut only)");
  bench->add_option("-o,--output", c.output, "CSV path (default stdout)");
  add_scenario_options(bench, c, raw);
  add_kernel_options(bench, c, raw);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0 && help) {
      const auto subs = app.get_subcommands();
      *help = subs.empty() ? app.help() : subs.front()->help();
      return c;
    }
    throw ParseError(e.what());
  }

  if (compute->parsed())
    c.subcommand = Subcommand::Compute;
  else if (verify_cmd->parsed())
    c.subcommand = Subcommand::Verify;
  else if (diff->parsed())
    c.subcommand = Subcommand::Diff;
  else if (gen->parsed())
    c.subcommand = Subcommand::Gen;
  else
    c.subcommand = Subcommand::Bench;

  c.kernel.method = kernel_from_tag(raw.kernel);
  c.kernel.ds_variant =
      raw.ds_variant == "atan" ? DsVariant::PerPairAtan : DsVariant::AngleSum;
  c.kernel.bh.order = raw.order == "dipole" ? ExpansionOrder::Dipole
                                            : ExpansionOrder::Quadrupole;
  c.format = raw.format == "json" ? ReportFormat::Json : ReportFormat::Text;
  c.threads = resolve_threads(raw.threads);

  if (!raw.scenario.empty()) {
    c.scenario.kind = scenario_from_name(raw.scenario);
    c.scenario.catmull_rom = raw.catmull_rom;
    c.has_scenario = true;
  }
  if (c.subcommand == Subcommand::Bench) {
    if (c.has_scenario == !c.input.empty())
      throw ParseError("bench needs exactly one of --scenario or --input");
    for (const auto &k : split_list(raw.kernels))
      c.bench_kernels.push_back(kernel_from_tag(k));
    for (const auto &b : split_list(raw.beta_sweep)) {
      try {
        c.beta_sweep.push_back(std::stod(b));
      } catch (const std::exception &) {
        throw ParseError("bad --beta-sweep value \"" + b + "\"");
      }
    }
  }
  if (c.subcommand == Subcommand::Compute && c.output.empty())
    c.output = sibling_path(c.input, ".cert.json");
  if (c.subcommand == Subcommand::Gen && c.expected.empty())
    c.expected = sibling_path(c.output, ".expected.json");
  return c;
}

int run_compute(const CliConfig &config, std::ostream &out,
                std::ostream &err) {
  try {
    const LoadedModel in = load_input(config.input, "");
    const LinkMatrix m = compute_linking_matrix(
        in.model, config.kernel, in.excluded, pipeline_options(config));
    write_file(config.output, serialize_matrix(m));
    if (in.closure)
      write_file(closure_path(config.output), closure_to_json(*in.closure));

    if (config.format == ReportFormat::Json) {
      json doc = {{"certificate", config.output},
                  {"kernel", m.kernel_tag},
                  {"loops", m.num_loops},
                  {"pairs", m.pair_count},
                  {"entries", m.entries.size()},
                  {"discretization_passes", m.discretization_passes},
                  {"discretized_segments", m.discretized_segments},
                  {"timings",
                   {{"pls", m.timings.pls},
                    {"discretize", m.timings.discretize},
                    {"kernel", m.timings.kernel}}},
                  {"fallbacks", m.fallback_count()},
                  {"bh_reruns", bh_reruns(m)},
                  {"max_cc_retries", m.max_cc_retries()},
                  {"diagnostics", diagnostics_json(m)}};
      out << doc.dump(2) << '\n';
    } else {
      out << "loops: " << m.num_loops << '\n'
          << "pairs: " << m.pair_count << '\n'
          << "entries: " << m.entries.size() << '\n'
          << "kernel: " << m.kernel_tag << '\n'
          << "discretization: " << m.discretization_passes << " passes, "
          << m.discretized_segments << " segments\n"
          << std::setprecision(4) << "PLS time: " << m.timings.pls << " s\n"
          << "discretization time: " << m.timings.discretize << " s\n"
          << "kernel time: " << m.timings.kernel << " s\n"
          << "fallbacks to crossing count: " << m.fallback_count() << '\n';
      for (const auto &d : m.diagnostics) {
        if (d.link.bh_reran)
          out << "pair " << d.i << " " << d.j << ": beta rerun at "
              << d.link.bh_beta << '\n';
        if (d.link.fell_back)
          out << "pair " << d.i << " " << d.j << ": raw " << d.link.raw
              << " resolved by crossing count\n";
      }
      out << "certificate: " << config.output << '\n';
    }
    return kExitOk;
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
}

int run_verify(const CliConfig &config, std::ostream &out, std::ostream &err) {
  try {
    const LinkMatrix ref = parse_matrix(read_file(config.reference));
    const LoadedModel in = load_input(config.input, closure_path(config.reference));
    const VerificationReport rep =
        verify(in.model, ref, config.kernel, config.early_exit, in.excluded,
               pipeline_options(config));
    out << (config.format == ReportFormat::Json ? report_to_json(rep) + "\n"
                                                : report_to_text(rep));
    return rep.passed() ? kExitOk : kExitMismatch;
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
}

int run_diff(const CliConfig &config, std::ostream &out, std::ostream &err) {
  try {
    const VerificationReport rep =
        diff_matrices(parse_matrix(read_file(config.input)),
                      parse_matrix(read_file(config.reference)));
    out << (config.format == ReportFormat::Json ? report_to_json(rep) + "\n"
                                                : report_to_text(rep));
    return rep.passed() ? kExitOk : kExitMismatch;
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
}

int run_gen(const CliConfig &config, std::ostream &out, std::ostream &err) {
  try {
    const Scenario s = generate(config.scenario);
    save_model(s.model, config.output);
    write_file(config.expected, serialize_matrix(s.expected));
    out << scenario_name(config.scenario.kind) << ": " << s.model.size()
        << " loops, " << total_segments(s.model) << " segments, "
        << s.expected.entries.size() << " expected entries\n"
        << "model: " << config.output << '\n'
        << "expected: " << config.expected << '\n';
    return kExitOk;
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
}

int run_bench(const CliConfig &config, std::ostream &out, std::ostream &err) {
  try {
    std::string name;
    CurveModel model;
    PairSet excluded;
    std::optional<LinkMatrix> expected;
    if (config.has_scenario) {
      Scenario s = generate(config.scenario);
      name = scenario_name(config.scenario.kind);
      model = std::move(s.model);
      expected = std::move(s.expected);
    } else {
      LoadedModel in = load_input(config.input, "");
      name = std::filesystem::path(config.input).stem().string();
      model = std::move(in.model);
      excluded = std::move(in.excluded);
      if (!config.expected.empty())
        expected = parse_matrix(read_file(config.expected));
    }

    struct Run {
      KernelChoice choice;
      bool fixed_beta;
    };
    std::vector<Run> runs;
    if (!config.beta_sweep.empty()) {
      for (double beta : config.beta_sweep) {
        KernelChoice k = config.kernel;
        k.method = KernelMethod::BarnesHut;
        k.bh.adaptive = false;
        k.bh.beta_init = beta;
        k.bh.beta_max = std::max(beta, k.bh.beta_max);
        runs.push_back({k, true});
      }
    } else {
      for (KernelMethod method : config.bench_kernels) {
        KernelChoice k = config.kernel;
        k.method = method;
        runs.push_back({k, false});
      }
    }

    std::ofstream file;
    if (!config.output.empty()) {
      file.open(config.output);
      if (!file)
        throw LinkcertError("cannot write " + config.output);
    }
    std::ostream &csv = config.output.empty() ? out : file;
    csv << "scenario,kernel,order,beta,segments,loops,pairs,pls_s,"
           "discretize_s,kernel_s,total_s,max_abs_error,mismatches\n";
    csv << std::setprecision(9);
    for (const auto &run : runs) {
      const auto t0 = std::chrono::steady_clock::now();
      const LinkMatrix m = compute_linking_matrix(model, run.choice, excluded,
                                                  pipeline_options(config));
      const double total = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
      const bool bh = run.choice.method == KernelMethod::BarnesHut;
      double beta = run.choice.bh.beta_init;
      if (bh && !run.fixed_beta)
        for (const auto &d : m.diagnostics)
          beta = std::max(beta, d.link.bh_beta);
      csv << name << ',' << m.kernel_tag << ','
          << (bh ? (run.choice.bh.order == ExpansionOrder::Dipole ? "dipole"
                                                                  : "quad")
                 : "")
          << ',';
      if (bh)
        csv << beta;
      csv << ',' << total_segments(model) << ',' << model.size() << ','
          << m.pair_count << ',' << m.timings.pls << ','
          << m.timings.discretize << ',' << m.timings.kernel << ',' << total
          << ',';
      if (expected) {
        double worst = 0.0;
        for (const auto &d : m.diagnostics)
          worst = std::max(
              worst, std::abs(d.link.raw -
                              static_cast<double>(expected->lookup(d.i, d.j))));
        const auto rep = diff_matrices(*expected, m);
        csv << worst << ','
            << rep.destroyed.size() + rep.created.size() + rep.changed.size();
      } else {
        csv << ',';
      }
      csv << '\n';
    }
    return kExitOk;
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
}

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CliConfig config;
  std::string help;
  try {
    config = parse_cli(args, &help);
  } catch (const std::exception &e) {
    return report_error(err, e);
  }
  if (!help.empty()) {
    out << help;
    return kExitOk;
  }
  switch (config.subcommand) {
  case Subcommand::Compute:
    return run_compute(config, out, err);
  case Subcommand::Verify:
    return run_verify(config, out, err);
  case Subcommand::Diff:
    return run_diff(config, out, err);
  case Subcommand::Gen:
    return run_gen(config, out, err);
  case Subcommand::Bench:
    return run_bench(config, out, err);
  }
  return kExitError;
}

} // namespace linkcert
