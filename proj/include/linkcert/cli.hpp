#pragma once

#include "linkcert/generators.hpp"
#include "linkcert/kernels.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace linkcert {

enum class Subcommand { Compute, Verify, Diff, Gen, Bench };
enum class ReportFormat { Text, Json };

/// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitError = 2;

struct CliConfig {
  Subcommand subcommand = Subcommand::Compute;
  std::string input;      // model (compute, verify, bench) or certificate A
  std::string reference;  // certificate (verify) or certificate B (diff)
  std::string output;     // certificate (compute), model (gen), csv (bench)
  std::string expected;   // expected certificate (gen output, bench input)
  KernelChoice kernel;
  int threads = 0;
  bool early_exit = false;
  ReportFormat format = ReportFormat::Text;

  // gen / bench
  ScenarioSpec scenario;
  bool has_scenario = false;
  std::vector<KernelMethod> bench_kernels;
  std::vector<double> beta_sweep;
};

/// Parses arguments (without the program name). Throws ParseError on bad
/// input; `help` receives usage text when --help is requested.
CliConfig parse_cli(const std::vector<std::string> &args, std::string *help);

int run_compute(const CliConfig &config, std::ostream &out, std::ostream &err);
int run_verify(const CliConfig &config, std::ostream &out, std::ostream &err);
int run_diff(const CliConfig &config, std::ostream &out, std::ostream &err);
int run_gen(const CliConfig &config, std::ostream &out, std::ostream &err);
int run_bench(const CliConfig &config, std::ostream &out, std::ostream &err);

/// Parses and dispatches; never throws.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// Sidecar file holding a braid's connection paths.
std::string closure_path(const std::string &certificate_path);

} // namespace linkcert
