#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "quadland/linalg.hpp"
#include "quadland/model.hpp"

namespace quadland {

// N samples in R^d (rows of `inputs`) with optional teacher labels.
struct Dataset {
  Matrix inputs;
  std::optional<Vector> labels;
  std::optional<Distribution> distribution;  // empty for deterministic data
  std::uint64_t seed = 0;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  bool labeled() const { return labels.has_value(); }
  Vector sample(Eigen::Index i) const { return inputs.row(i).transpose(); }
};

// Row-major i.i.d. draws from one CounterRng stream keyed by `seed`.
Dataset sample_dataset(const Distribution& dist, Eigen::Index n, Eigen::Index d,
                       std::uint64_t seed);

// labels[i] = forward(teacher, X_i).
Dataset label_dataset(const Dataset& dataset, const TeacherModel& teacher);

// Header `# n=<N> d=<d> dist=<tag> seed=<u64>`, then N rows of d inputs and,
// when labeled, a final label column.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
void write_dataset_csv(const std::string& path, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

}  // namespace quadland
