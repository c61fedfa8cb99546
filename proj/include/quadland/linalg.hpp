#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <string>

namespace quadland {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A matrix is treated as full column rank iff
// sigma_min > kRankTolerance * max(1, sigma_max).
inline constexpr double kRankTolerance = 1e-10;

// Singular values in decreasing order.
Vector singular_values(const Matrix& m);

double sigma_min(const Matrix& m);
double sigma_max(const Matrix& m);

// Column-rank test used for weight matrices (m x d, rank d wanted).
bool is_full_column_rank(const Matrix& m);

// Numerical rank: count of singular values above `relative_threshold * sigma_max`.
int numerical_rank(const Matrix& m, double relative_threshold);

// W^T W, symmetrized so that the result is exactly symmetric.
Matrix gram(const Matrix& w);

bool is_symmetric(const Matrix& m, double relative_tol = 1e-12);

// Eigenvalues in increasing order of a symmetric matrix.
Vector symmetric_eigenvalues(const Matrix& m);

// ||W1^T W1 - W2^T W2||_F; the orthonormal-orbit test works at the Gram level.
double gram_gap(const Matrix& w1, const Matrix& w2);

// Neumaier compensated summation; the result does not depend on the order
// of additions to within a couple of ulps.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Shared CSV matrix format: first line `# rows=<m> cols=<d>`, then row-major
// comma-separated values printed with 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::string& path);

// Formats a double with round-trip precision.
std::string format_double(double x);

}  // namespace quadland
