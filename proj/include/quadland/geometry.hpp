#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quadland/data.hpp"
#include "quadland/linalg.hpp"
#include "quadland/model.hpp"

namespace quadland {

// N* = d(d+1)/2, the dimension of the space of symmetric d x d matrices.
Eigen::Index critical_sample_count(Eigen::Index d);

// Rows (X(1)^2, ..., X(d)^2, X(k)X(l) for k < l in lexicographic order).
struct TensorizedDesign {
  Matrix xi;
  Eigen::Index d = 0;
};

TensorizedDesign tensorize(const Matrix& inputs);
TensorizedDesign tensorize(const Dataset& dataset);

// (M_11, ..., M_dd, 2 M_kl for k < l): pairs with a tensorized row to give
// X^T M X exactly.
Vector sym_vector(const Matrix& m);
// Inverse of sym_vector.
Matrix sym_matrix(const Vector& v, Eigen::Index d);

struct SpanReport {
  int rank = 0;
  bool spans = false;
};

// Numerical rank of the tensorized design with threshold
// 1e-10 * sigma_max * max(N, D); spans iff rank = D.
SpanReport spans_symmetric(const Matrix& inputs);
SpanReport spans_symmetric(const Dataset& dataset);

// X_t = (p_1^{t-1}, ..., p_d^{t-1}), t = 1..n, over the first d primes.
// Requires d <= 8 and finite entries.
Dataset prime_vandermonde_data(Eigen::Index d, Eigen::Index n);

struct PrimeSpanCertificate {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  // The exponent vectors of p_k p_l (k <= l) are pairwise distinct, so by
  // unique factorization the Vandermonde nodes are pairwise distinct.
  bool distinct_exponents = false;
  bool distinct_nodes = false;
  int exact_rank = 0;   // rank over the rationals, exact integer entries
  int double_rank = 0;  // spans_symmetric on the double-precision data
  // Same threshold after alternating row/column norm equilibration of Xi.
  int equilibrated_rank = 0;
  bool spans = false;   // exact_rank == N*
};

PrimeSpanCertificate prime_vandermonde_certificate(Eigen::Index d, Eigen::Index n);

struct NullInterpolatorCertificate {
  double empirical_risk = 0.0;
  double population_risk = 0.0;
  double lower_bound = 0.0;       // c_lower * delta^2
  double max_quadratic_form = 0.0;  // max_i |X_i^T M X_i|
  double spectral_norm = 0.0;     // ||M||_2
  bool interpolates = false;      // empirical_risk <= 1e-10 * max(1, mean Y^2)
  bool above_lower_bound = false;  // population_risk >= lower_bound - 1e-9
};

struct NullInterpolatorResult {
  StudentWeights student;
  Matrix direction;  // M, orthogonal to every X_i X_i^T, ||M||_2 = 1
  double delta = 0.0;
  NullInterpolatorCertificate certificate;
};

// Student with Gram (W*)^T W* + delta M that fits every sample exactly but
// generalizes no better than the energy barrier. `inputs` may have zero rows.
NullInterpolatorResult null_interpolator(const TeacherModel& teacher, const Matrix& inputs,
                                         const Moments& moments, Eigen::Index target_rows,
                                         std::optional<double> delta = std::nullopt);
NullInterpolatorResult null_interpolator(const TeacherModel& teacher, const Dataset& dataset,
                                         const Moments& moments, Eigen::Index target_rows,
                                         std::optional<double> delta = std::nullopt);

struct GramRecovery {
  Matrix m_hat;  // estimate of W^T W - (W*)^T W*
  double residual_norm = 0.0;
};

// Least-squares solve of Xi * sym_vector(M) = v with v_i = f(W; X_i) - Y_i.
// Labels come from the dataset when present, otherwise from the teacher.
GramRecovery recover_gram_discrepancy(const Dataset& dataset, const StudentWeights& student,
                                      const TeacherModel& teacher);

struct TensorizedCovariance {
  Matrix sigma_hat;  // (1/N) Xi^T Xi
  double min_eig = 0.0;
  double max_eig = 0.0;
  int rank = 0;
};

TensorizedCovariance tensorized_covariance(const Dataset& dataset);

struct SampleComplexityResult {
  Eigen::Index d = 0;
  Eigen::Index n_star = 0;
  double spans_fraction_at_n_star = 0.0;
  double spans_fraction_below = 0.0;
  std::vector<SpanReport> at_n_star;
  std::vector<SpanReport> below;
};

// Span test on `trials` independent datasets of size N* and N* - 1.
SampleComplexityResult sample_complexity_scan(const Distribution& dist, Eigen::Index d,
                                              std::size_t trials, std::uint64_t seed,
                                              unsigned jobs = 1);

}  // namespace quadland
