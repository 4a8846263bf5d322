// Command-line runner for the registered stochastic inverse problem examples.
#include "siplab/siplab.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

void print_examples(std::FILE* stream) {
  std::fprintf(stream, "registered examples:\n");
  for (size_t i = 0; i < sip_example_count(); ++i) {
    std::fprintf(stream, "  %s\n", sip_example_name(i));
  }
}

}  // namespace

int main(int argc, char** argv) {
  sip_run_config config;
  sip_run_config_init(&config);

  std::string example;
  std::string out = config.out;
  std::string format = config.format;
  bool list = false;
  bool quiet = false;

  CLI::App app{"Solve and verify stochastic inverse problem examples", "siplab"};
  app.add_option("example", example, "Example to run (see --list)");
  app.add_flag("--list", list, "List the registered examples and exit");
  app.add_option("--samples", config.samples, "Monte Carlo sample count")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", config.seed, "Root RNG seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--grid", config.grid, "Grid points per dimension")->check(CLI::Range(2, 100000));
  app.add_option("--w", config.w, "Branch weight (two-to-one)");
  app.add_option("--eps", config.eps, "Negative domain extent (two-to-one)");
  app.add_option("--sigma", config.sigma, "Noise standard deviation (regression-compare)");
  app.add_option("--xstar", config.xstar, "Prediction point (regression-compare)");
  app.add_option("--n", config.n, "Replicate count (stochastic-map-mean)");
  app.add_flag("--quiet", quiet, "Only report failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    print_examples(stdout);
    return 0;
  }
  if (example.empty()) {
    std::fprintf(stderr, "error: no example given\n");
    print_examples(stderr);
    return 2;
  }

  config.example = example.c_str();
  config.out = out.c_str();
  config.format = format.c_str();

  sip_example_result* result = nullptr;
  const sip_status status = sip_example_run(&config, &result);
  if (status == SIP_ERR_UNKNOWN_EXAMPLE || status == SIP_ERR_INVALID_ARGUMENT) {
    std::fprintf(stderr, "error: %s\n", sip_last_error());
    if (status == SIP_ERR_UNKNOWN_EXAMPLE) print_examples(stderr);
    return 2;
  }
  if (status != SIP_OK) {
    std::fprintf(stderr, "error (%s): %s\n", sip_status_string(status), sip_last_error());
    return 3;
  }

  for (size_t i = 0; i < sip_example_result_check_count(result); ++i) {
    const char* name = nullptr;
    const char* details = nullptr;
    sip_check check{};
    sip_example_result_check(result, i, &name, &details, &check);
    if (quiet && check.pass) continue;
    std::printf("%s  %s  statistic=%.6g threshold=%.6g  %s\n", check.pass ? "PASS" : "FAIL",
                name, check.statistic, check.threshold, details);
  }
  for (size_t i = 0; i < sip_example_result_warning_count(result); ++i) {
    std::fprintf(stderr, "warning: %s\n", sip_example_result_warning(result, i));
  }
  if (!quiet) {
    for (size_t i = 0; i < sip_example_result_file_count(result); ++i) {
      std::printf("wrote %s\n", sip_example_result_file(result, i));
    }
  }
  const int code = sip_example_result_exit_code(result);
  sip_example_result_free(result);
  return code;
}
