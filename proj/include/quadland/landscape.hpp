#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadland/data.hpp"
#include "quadland/model.hpp"

namespace quadland {

enum class BarrierMode { population, empirical };

std::string to_string(BarrierMode mode);

struct BarrierReport {
  double barrier_value = 0.0;
  double risk_value = 0.0;
  bool below = false;
  BarrierMode constant_used = BarrierMode::population;
  double sigma_min_teacher = 0.0;
};

// population: alpha^2 * c_lower * sigma_min(W*)^4
// empirical:  alpha^2 * (1/2) * C5 * sigma_min(W*)^4, where C5 is c_lower of
//             the truncated moments passed in (see barrier_moments).
// `alpha` defaults to the teacher's activation coefficient. Output weights are
// absorbed before sigma_min is taken.
double energy_barrier(const TeacherModel& teacher, const Moments& moments, BarrierMode mode,
                      std::optional<double> alpha = std::nullopt);

// Truncated moments behind the empirical barrier. The threshold defaults to
// max_i ||X_i||_inf, which makes the conditioning vacuous on the observed data.
Moments barrier_moments(const Dataset& dataset, std::optional<double> threshold = std::nullopt);

// d^K, the threshold parameterization of the empirical barrier theorem.
double power_threshold(Eigen::Index d, double k);

// Rank d-1 student whose Gram is the teacher Gram with its smallest eigenvalue
// removed. One row of the d x d square root is split across the m - d spare
// rows so the Gram is unchanged.
StudentWeights worst_rank_deficient(const TeacherModel& teacher);

// W (target_rows x d) with W^T W = gram; rows beyond d are zero.
StudentWeights embed_gram(const Matrix& gram, Eigen::Index target_rows);

enum class Verdict { global_optimum, barrier_protected, inconclusive };

std::string to_string(Verdict verdict);

struct StationarityCertificate {
  bool is_full_rank = false;
  double grad_norm = 0.0;
  double gram_gap = 0.0;
  double risk = 0.0;
  double barrier = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

// Population version: full rank + ||grad L|| <= grad_tol + Gram gap <= gram_tol
// gives global-optimum; rank-deficient with L >= barrier gives barrier-protected.
StationarityCertificate certify_stationary_global(const StudentWeights& student,
                                                  const TeacherModel& teacher,
                                                  const Moments& moments, double grad_tol,
                                                  double gram_tol);

// Same test on the empirical risk of a labeled dataset; the barrier is the
// empirical one.
StationarityCertificate certify_stationary_global_empirical(const StudentWeights& student,
                                                            const TeacherModel& teacher,
                                                            const Dataset& dataset,
                                                            double grad_tol, double gram_tol);

struct SweepTrial {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  int rank = 0;
  double scale = 0.0;
  double risk = 0.0;
};

struct SweepResult {
  double min_risk_found = 0.0;
  double barrier = 0.0;
  bool holds = false;  // min_risk_found >= barrier - 1e-9
  std::vector<SweepTrial> trials;
};

// Random rank <= d-1 students: an m x (d-1) gaussian factor times a
// (d-1) x d gaussian factor, with the Gram rescaled to its risk-minimizing
// nonnegative multiple. Trials run on `jobs` threads; results are ordered by
// trial index.
SweepResult rank_deficient_sweep(const TeacherModel& teacher, const Moments& moments,
                                 std::size_t trials, std::uint64_t seed, unsigned jobs = 1);

// Upper bound max{mu4, 3 mu2^2} sigma_min^4 achieved by worst_rank_deficient.
double tightness_bound(const TeacherModel& teacher, const Moments& moments);

// ||W||_F bound on the empirical sublevel set {R(W) <= risk}:
//   ( sqrt(risk) / (mu2 (1 - eps)) + (1 + eps)/(1 - eps) ||W*||_F^2 )^{1/2},
// valid when the sample second-moment matrix is within eps * mu2 of mu2 * I.
double sublevel_norm_bound(double risk, double mu2, double teacher_fro_sq, double eps = 0.5);

// Deterministic version using the extreme eigenvalues of (1/N) sum X_i X_i^T:
//   ( (sqrt(risk) + lambda_max ||W*||_F^2) / lambda_min )^{1/2}.
double sublevel_norm_bound_data(double risk, double lambda_min, double lambda_max,
                                double teacher_fro_sq);

}  // namespace quadland
