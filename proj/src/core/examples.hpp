#pragma once

#include "verification.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace siplab {

struct RunConfig {
  std::string example;
  Eigen::Index samples = 10000;
  std::uint64_t seed = 7;
  std::string out = ".";
  std::string format = "csv";  // csv | json
  int grid = 101;

  // Example-specific knobs; each example reads the ones it needs.
  double w = 0.5;
  double eps = 1.0;
  double sigma = 1.0;
  double xstar = 2.0;
  int n = 5;

  void validate() const;
};

struct ExampleResult {
  int exit_code = 0;  // 0 when every check passes, 1 otherwise
  std::vector<CheckReport> checks;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

const std::vector<std::string>& registered_examples();

// Writes <out>/<example>_{samples,grid,report}.<format>. Throws
// kUnknownExample for names outside the registered set.
ExampleResult run_example(const RunConfig& config);

}  // namespace siplab
