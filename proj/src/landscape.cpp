#include "quadland/landscape.hpp"

#include <cmath>
#include <limits>

#include "quadland/errors.hpp"
#include "quadland/parallel.hpp"
#include "quadland/risk.hpp"
#include "quadland/rng.hpp"

namespace quadland {

std::string to_string(BarrierMode mode) {
  return mode == BarrierMode::population ? "population" : "empirical";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::global_optimum:
      return "global-optimum";
    case Verdict::barrier_protected:
      return "barrier-protected";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

namespace {

// sigma_min of the absorbed teacher; throws when rank(W*) < d.
double teacher_sigma_min(const TeacherModel& teacher) {
  const TeacherModel absorbed = absorb_output_weights(teacher);
  if (!is_full_column_rank(absorbed.weights())) {
    throw InvalidArgument("teacher weights must have rank d");
  }
  return sigma_min(absorbed.weights());
}

}  // namespace

double energy_barrier(const TeacherModel& teacher, const Moments& moments, BarrierMode mode,
                      std::optional<double> alpha) {
  if (moments.degenerate) {
    throw DegenerateDistribution("Var(X^2) = 0: the energy barrier vanishes");
  }
  const double s = teacher_sigma_min(teacher);
  const double a = alpha.value_or(teacher.activation().alpha);
  const double constant = mode == BarrierMode::population ? moments.c_lower : 0.5 * moments.c_lower;
  return a * a * constant * s * s * s * s;
}

Moments barrier_moments(const Dataset& dataset, std::optional<double> threshold) {
  double t = 0.0;
  if (threshold) {
    t = *threshold;
  } else if (dataset.size() > 0) {
    t = dataset.inputs.cwiseAbs().maxCoeff();
  }
  if (!(t > 0.0)) throw InvalidArgument("barrier_moments: truncation threshold must be positive");
  if (!dataset.distribution) {
    throw InvalidArgument("barrier_moments: dataset has no coordinate distribution");
  }
  return truncated_moments(*dataset.distribution, t, dataset.seed);
}

double power_threshold(Eigen::Index d, double k) { return std::pow(static_cast<double>(d), k); }

StudentWeights worst_rank_deficient(const TeacherModel& teacher) {
  const Matrix w_star = absorb_output_weights(teacher).weights();
  const Eigen::Index m = w_star.rows(), d = w_star.cols();
  if (m < d) throw InvalidArgument("worst_rank_deficient: need m >= d");
  if (!is_full_column_rank(w_star)) throw InvalidArgument("teacher weights must have rank d");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram(w_star));
  const Vector& lambda = eig.eigenvalues();  // ascending; drop index 0
  const Matrix& q = eig.eigenvectors();
  Matrix w_bar = Matrix::Zero(d, d);
  for (Eigen::Index j = 1; j < d; ++j) {
    w_bar += std::sqrt(std::max(0.0, lambda(j))) * q.col(j) * q.col(j).transpose();
  }
  if (m == d) return StudentWeights(w_bar);

  Eigen::Index split = 0;
  w_bar.rowwise().squaredNorm().maxCoeff(&split);
  Matrix w = Matrix::Zero(m, d);
  w.topRows(d) = w_bar;
  w.row(split) = 0.5 * w_bar.row(split);
  const double spread = std::sqrt(3.0) / (2.0 * std::sqrt(static_cast<double>(m - d)));
  for (Eigen::Index i = d; i < m; ++i) w.row(i) = spread * w_bar.row(split);
  return StudentWeights(std::move(w));
}

StudentWeights embed_gram(const Matrix& g, Eigen::Index target_rows) {
  if (g.rows() != g.cols() || !is_symmetric(g, 1e-12)) {
    throw InvalidArgument("embed_gram: gram must be square and symmetric");
  }
  const Eigen::Index d = g.rows();
  if (target_rows < d) throw InvalidArgument("embed_gram: need target_rows >= d");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.transpose()));
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::max(1.0, d > 0 ? std::abs(lambda(d - 1)) : 0.0);
  if (d > 0 && lambda(0) < -1e-10 * scale) {
    throw InvalidArgument("embed_gram: gram is indefinite");
  }
  Matrix w = Matrix::Zero(target_rows, d);
  w.topRows(d) = lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  return StudentWeights(std::move(w));
}

namespace {

Verdict decide(bool full_rank, double grad_norm, double grad_tol, double gap, double gram_tol,
               double risk, double barrier) {
  if (full_rank && grad_norm <= grad_tol && gap <= gram_tol) return Verdict::global_optimum;
  if (!full_rank && std::isfinite(barrier) && risk >= barrier) return Verdict::barrier_protected;
  return Verdict::inconclusive;
}

}  // namespace

StationarityCertificate certify_stationary_global(const StudentWeights& student,
                                                  const TeacherModel& teacher,
                                                  const Moments& moments, double grad_tol,
                                                  double gram_tol) {
  StationarityCertificate cert;
  cert.is_full_rank = is_full_column_rank(student.weights);
  cert.grad_norm = population_gradient(student, teacher, moments).norm();
  cert.gram_gap = (gram(student.weights) - teacher_gram(teacher)).norm();
  cert.risk = population_risk_value(student, teacher, moments);
  try {
    cert.barrier = energy_barrier(teacher, moments, BarrierMode::population);
  } catch (const std::exception&) {
    cert.barrier = std::numeric_limits<double>::quiet_NaN();
  }
  cert.verdict = decide(cert.is_full_rank, cert.grad_norm, grad_tol, cert.gram_gap, gram_tol,
                        cert.risk, cert.barrier);
  return cert;
}

StationarityCertificate certify_stationary_global_empirical(const StudentWeights& student,
                                                            const TeacherModel& teacher,
                                                            const Dataset& dataset,
                                                            double grad_tol, double gram_tol) {
  StationarityCertificate cert;
  cert.is_full_rank = is_full_column_rank(student.weights);
  cert.grad_norm = empirical_gradient(student, dataset).norm();
  cert.gram_gap = (gram(student.weights) - teacher_gram(teacher)).norm();
  cert.risk = empirical_risk(student, dataset);
  try {
    cert.barrier = energy_barrier(teacher, barrier_moments(dataset), BarrierMode::empirical);
  } catch (const std::exception&) {
    cert.barrier = std::numeric_limits<double>::quiet_NaN();
  }
  cert.verdict = decide(cert.is_full_rank, cert.grad_norm, grad_tol, cert.gram_gap, gram_tol,
                        cert.risk, cert.barrier);
  return cert;
}

SweepResult rank_deficient_sweep(const TeacherModel& teacher, const Moments& moments,
                                 std::size_t trials, std::uint64_t seed, unsigned jobs) {
  if (trials < 1) throw InvalidArgument("rank_deficient_sweep: need trials >= 1");
  SweepResult result;
  result.barrier = energy_barrier(teacher, moments, BarrierMode::population);
  const Matrix g_star = teacher_gram(teacher);
  const Eigen::Index m = teacher.width(), d = teacher.dim();
  const double mu2sq = moments.mu2 * moments.mu2;
  const double kurt = moments.mu4 - 3.0 * mu2sq;
  // L(t) for A = G* - t G is the quadratic a - 2 b t + c t^2.
  auto inner = [&](const Matrix& x, const Matrix& y) {
    return mu2sq * x.trace() * y.trace() + 2.0 * mu2sq * (x.array() * y.array()).sum() +
           kurt * x.diagonal().dot(y.diagonal());
  };

  result.trials.resize(trials);
  parallel_for(trials, jobs, [&](std::size_t i) {
    SweepTrial& trial = result.trials[i];
    trial.index = i;
    trial.seed = derive_seed(seed, i);
    CounterRng rng(trial.seed);
    Matrix w = Matrix::Zero(m, d);
    if (d > 1) {
      Matrix left(m, d - 1), right(d - 1, d);
      for (Eigen::Index r = 0; r < left.rows(); ++r)
        for (Eigen::Index c = 0; c < left.cols(); ++c) left(r, c) = rng.standard_normal();
      for (Eigen::Index r = 0; r < right.rows(); ++r)
        for (Eigen::Index c = 0; c < right.cols(); ++c) right(r, c) = rng.standard_normal();
      w = left * right;
    }
    const Matrix g = gram(w);
    const double c = inner(g, g);
    const double t = c > 0.0 ? std::max(0.0, inner(g_star, g) / c) : 0.0;
    const StudentWeights student(std::sqrt(t) * w);
    trial.scale = t;
    trial.rank = numerical_rank(student.weights, kRankTolerance);
    trial.risk = population_risk(discrepancy(teacher, student), moments).value;
  });

  result.min_risk_found = std::numeric_limits<double>::infinity();
  for (const auto& t : result.trials) result.min_risk_found = std::min(result.min_risk_found, t.risk);
  result.holds = result.min_risk_found >= result.barrier - 1e-9;
  return result;
}

double tightness_bound(const TeacherModel& teacher, const Moments& moments) {
  const double s = teacher_sigma_min(teacher);
  return std::max(moments.mu4, 3.0 * moments.mu2 * moments.mu2) * s * s * s * s;
}

double sublevel_norm_bound(double risk, double mu2, double teacher_fro_sq, double eps) {
  return std::sqrt(std::sqrt(risk) / (mu2 * (1.0 - eps)) + (1.0 + eps) / (1.0 - eps) * teacher_fro_sq);
}

double sublevel_norm_bound_data(double risk, double lambda_min, double lambda_max,
                                double teacher_fro_sq) {
  if (!(lambda_min > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt((std::sqrt(risk) + lambda_max * teacher_fro_sq) / lambda_min);
}

}  // namespace quadland
