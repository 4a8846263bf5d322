#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace siplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Mirrors the status codes of the C API one to one.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDomain = 2,
  kDimension = 3,
  kNotPositiveDefinite = 4,
  kRankDeficient = 5,
  kNoSolution = 6,
  kPredictability = 7,
  kConvergence = 8,
  kUnknownExample = 9,
  kIo = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

std::string format_vector(const Vector& v);

}  // namespace siplab
