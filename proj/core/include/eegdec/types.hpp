#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

// For the tree predictors, which walk raw row pointers.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Input/config problems. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough trials/classes to honor the request. Exit code 3 under --strict.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown (singular systems, non-finite values). Exit code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : int { LeftTurn = 0, RightTurn = 1, Straight = 2 };

inline constexpr int kNumClasses = 3;

const std::string& label_name(Label label);
Label label_from_name(const std::string& name);

namespace ingest {

struct EventMarker {
  std::int64_t onset_sample = 0;
  Label label = Label::Straight;
};

// channels x samples, microvolts. Electrode positions are unit vectors so the
// spherical-spline interpolator can use dot products as cos(angle).
struct Recording {
  Matrix data;
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::vector<Vec3> electrode_pos;
  std::set<int> bad_channels;

  int channels() const { return static_cast<int>(data.rows()); }
  std::int64_t samples() const { return data.cols(); }

  // Throws ValidationError on any broken invariant (shape/fs/unit norms/bad set).
  void validate() const;
};

}  // namespace ingest
}  // namespace eegdec
