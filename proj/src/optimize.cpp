#include "quadland/optimize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "quadland/errors.hpp"
#include "quadland/geometry.hpp"
#include "quadland/risk.hpp"
#include "quadland/rng.hpp"

namespace quadland {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Students built inside the optimizer are already checked for finiteness.
StudentWeights as_student(const Matrix& w) {
  StudentWeights s;
  s.weights = w;
  return s;
}

double gram_sigma_min(const Matrix& w) {
  if (w.rows() < w.cols()) return 0.0;
  const Vector eig = symmetric_eigenvalues(gram(w));
  return std::sqrt(std::max(0.0, eig(0)));
}

}  // namespace

EmpiricalObjective::EmpiricalObjective(Dataset dataset, const TeacherModel& teacher)
    : dataset_(std::move(dataset)) {
  if (!dataset_.labeled()) throw InvalidArgument("empirical objective needs labeled data");
  if (dataset_.dim() != teacher.dim()) throw InvalidArgument("teacher/data dimension mismatch");
  try {
    barrier_ = energy_barrier(teacher, barrier_moments(dataset_), BarrierMode::empirical);
  } catch (const std::exception&) {
    barrier_ = kNaN;
  }
  teacher_fro_sq_ = teacher_gram(teacher).trace();
  const Matrix cov = dataset_.inputs.transpose() * dataset_.inputs / static_cast<double>(dataset_.size());
  const Vector eig = symmetric_eigenvalues(0.5 * (cov + cov.transpose()));
  lambda_min_ = eig(0);
  lambda_max_ = eig(eig.size() - 1);
  if (dataset_.distribution) {
    mu2_ = moments_of(*dataset_.distribution).mu2;
    const Matrix centered = cov - mu2_ * Matrix::Identity(cov.rows(), cov.cols());
    covariance_event_ = symmetric_eigenvalues(centered).cwiseAbs().maxCoeff() <= 0.5 * mu2_;
  }
}

double EmpiricalObjective::value(const Matrix& w) const {
  return empirical_risk(as_student(w), dataset_);
}

Matrix EmpiricalObjective::gradient(const Matrix& w) const {
  return empirical_gradient(as_student(w), dataset_);
}

double EmpiricalObjective::norm_bound(double risk) const {
  double bound = sublevel_norm_bound_data(risk, lambda_min_, lambda_max_, teacher_fro_sq_);
  if (covariance_event_) bound = std::min(bound, sublevel_norm_bound(risk, mu2_, teacher_fro_sq_));
  return bound;
}

PopulationObjective::PopulationObjective(TeacherModel teacher, Moments moments)
    : teacher_(std::move(teacher)), moments_(moments) {
  try {
    barrier_ = energy_barrier(teacher_, moments_, BarrierMode::population);
  } catch (const std::exception&) {
    barrier_ = kNaN;
  }
  teacher_fro_sq_ = teacher_gram(teacher_).trace();
}

double PopulationObjective::value(const Matrix& w) const {
  return population_risk_value(as_student(w), teacher_, moments_);
}

Matrix PopulationObjective::gradient(const Matrix& w) const {
  return population_gradient(as_student(w), teacher_, moments_);
}

double PopulationObjective::norm_bound(double risk) const {
  return std::sqrt(std::sqrt(risk) / moments_.mu2 + teacher_fro_sq_);
}

double estimate_smoothness(const Matrix& w, const Objective& objective,
                           const SmoothnessOptions& options) {
  CounterRng rng(options.seed);
  Matrix v(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.standard_normal();
  v /= v.norm();
  const double h = 1e-5 * std::max(1.0, w.norm());
  double lambda = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Matrix hv = (objective.gradient(w + h * v) - objective.gradient(w - h * v)) / (2.0 * h);
    if (!hv.allFinite()) throw NonFinite("estimate_smoothness: non-finite Hessian-vector product");
    const double next = hv.norm();
    if (next == 0.0) return 0.0;
    v = hv / next;
    const bool converged = it > 0 && std::abs(next - lambda) <= options.relative_tolerance * next;
    lambda = next;
    if (converged) break;
  }
  return lambda;
}

void GDConfig::validate() const {
  if (!(grad_tol > 0.0)) throw InvalidArgument("GDConfig: grad_tol must be positive");
  if (max_iters < 0) throw InvalidArgument("GDConfig: max_iters must be >= 0");
  if (record_every < 1) throw InvalidArgument("GDConfig: record_every must be >= 1");
  if (const auto* f = std::get_if<FixedStep>(&step); f && !(f->eta > 0.0)) {
    throw InvalidArgument("GDConfig: fixed step must be positive");
  }
  if (const auto* s = std::get_if<InverseSmoothnessStep>(&step)) {
    if (!(s->safety >= 2.0)) throw InvalidArgument("GDConfig: safety divisor must be >= 2");
    if (s->refresh < 1) throw InvalidArgument("GDConfig: refresh must be >= 1");
  }
  if (const auto* b = std::get_if<BacktrackingStep>(&step)) {
    if (!(b->shrink > 0.0 && b->shrink < 1.0)) throw InvalidArgument("GDConfig: need 0 < shrink < 1");
    if (!(b->slope > 0.0 && b->slope < 1.0)) throw InvalidArgument("GDConfig: need 0 < slope < 1");
    if (!(b->initial > 0.0)) throw InvalidArgument("GDConfig: initial step must be positive");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol:
      return "grad_tol";
    case Termination::max_iters:
      return "max_iters";
    case Termination::nonfinite:
      return "nonfinite";
  }
  return "unknown";
}

std::unique_ptr<Objective> make_objective(const Problem& problem, BarrierMode kind) {
  if (kind == BarrierMode::empirical) {
    if (!problem.dataset) throw InvalidArgument("empirical objective needs a dataset");
    Dataset data = problem.dataset->labeled() ? *problem.dataset
                                              : label_dataset(*problem.dataset, problem.teacher);
    return std::make_unique<EmpiricalObjective>(std::move(data), problem.teacher);
  }
  if (!problem.moments) throw InvalidArgument("population objective needs moments");
  return std::make_unique<PopulationObjective>(problem.teacher, *problem.moments);
}

Trajectory gradient_descent(const StudentWeights& initial, const Problem& problem,
                            const GDConfig& config) {
  const auto objective = make_objective(problem, config.objective);
  return gradient_descent(initial, *objective, config);
}

namespace {

struct Step {
  Matrix w;
  double risk = 0.0;
  double eta = 0.0;
  bool accepted = false;
};

// Armijo backtracking from `eta`; rejects non-finite trial points.
Step backtrack(const Objective& objective, const Matrix& w, const Matrix& g, double risk,
               double eta, double shrink, double slope) {
  const double g2 = g.squaredNorm();
  for (int attempt = 0; attempt < 200 && eta > 0.0; ++attempt, eta *= shrink) {
    Matrix trial = w - eta * g;
    if (!trial.allFinite()) continue;
    const double r = objective.value(trial);
    if (std::isfinite(r) && r <= risk - slope * eta * g2) return {std::move(trial), r, eta, true};
  }
  return {};
}

}  // namespace

Trajectory gradient_descent(const StudentWeights& initial, const Objective& objective,
                            const GDConfig& config) {
  config.validate();
  Trajectory traj;
  traj.barrier = objective.barrier();
  traj.grad_tol = config.grad_tol;

  Matrix w = initial.weights;
  double risk = objective.value(w);
  Matrix g = objective.gradient(w);
  double grad_norm = g.norm();
  double sigma = gram_sigma_min(w);
  double last_eta = 0.0;
  traj.min_sigma_min = sigma;

  auto record = [&](long k) {
    IterateRecord rec;
    rec.iteration = k;
    rec.risk = risk;
    rec.grad_norm = grad_norm;
    rec.sigma_min = sigma;
    rec.fro_norm = w.norm();
    rec.step = last_eta;
    rec.below_barrier = std::isfinite(traj.barrier) && risk < traj.barrier;
    if (std::isfinite(risk) && risk <= traj.barrier) {
      const double bound = objective.norm_bound(risk);
      if (rec.fro_norm > bound * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "sublevel norm bound violated at iteration " << k << ": ||W||_F = " << rec.fro_norm
            << " > " << bound;
        throw ContractViolation(msg.str());
      }
    }
    traj.records.push_back(rec);
  };

  auto finish = [&](long k, Termination why) {
    traj.iterations = k;
    traj.termination = why;
    traj.final_risk = risk;
    traj.final_grad_norm = grad_norm;
    traj.final_weights = as_student(w);
    if (traj.records.empty() || traj.records.back().iteration != k) record(k);
    return traj;
  };

  if (!std::isfinite(risk) || !g.allFinite()) return finish(0, Termination::nonfinite);
  record(0);

  double smooth_eta = 0.0;
  for (long k = 0;; ++k) {
    if (grad_norm <= config.grad_tol) return finish(k, Termination::grad_tol);
    if (k >= config.max_iters) return finish(k, Termination::max_iters);

    Step step;
    if (const auto* fixed = std::get_if<FixedStep>(&config.step)) {
      step.w = w - fixed->eta * g;
      step.eta = fixed->eta;
      step.risk = step.w.allFinite() ? objective.value(step.w) : kNaN;
      step.accepted = true;
      if (!std::isfinite(step.risk)) return finish(k, Termination::nonfinite);
    } else if (const auto* inv = std::get_if<InverseSmoothnessStep>(&config.step)) {
      if (k % inv->refresh == 0) {
        const double l_hat = estimate_smoothness(w, objective);
        smooth_eta = l_hat > 0.0 ? 1.0 / (inv->safety * l_hat) : 1.0;
      }
      step = backtrack(objective, w, g, risk, smooth_eta, 0.5, 1e-4);
      if (step.accepted && step.eta < smooth_eta) ++traj.fallback_steps;
    } else {
      const auto& bt = std::get<BacktrackingStep>(config.step);
      step = backtrack(objective, w, g, risk, bt.initial, bt.shrink, bt.slope);
    }
    if (!step.accepted) {
      std::ostringstream msg;
      msg << "no descent step found at iteration " << k << " (risk " << risk << ", grad "
          << grad_norm << ")";
      throw ContractViolation(msg.str());
    }

    traj.max_risk_increase = std::max(traj.max_risk_increase, step.risk - risk);
    w = std::move(step.w);
    risk = step.risk;
    last_eta = step.eta;
    g = objective.gradient(w);
    grad_norm = g.norm();
    if (!g.allFinite()) return finish(k + 1, Termination::nonfinite);
    sigma = gram_sigma_min(w);
    traj.min_sigma_min = std::min(traj.min_sigma_min, sigma);
    if ((k + 1) % config.record_every == 0) record(k + 1);
  }
}

StationarityReport epsilon_stationarity_report(const Trajectory& trajectory,
                                               const TeacherModel& teacher,
                                               const Dataset& dataset, const Moments& moments,
                                               double gram_tol) {
  if (trajectory.termination != Termination::grad_tol) {
    throw InvalidArgument("epsilon_stationarity_report: run did not reach grad_tol");
  }
  const Dataset labeled = dataset.labeled() ? dataset : label_dataset(dataset, teacher);
  const StudentWeights& w = trajectory.final_weights;
  StationarityReport report;
  report.epsilon = trajectory.grad_tol;
  report.empirical_risk = empirical_risk(w, labeled);
  report.population_risk = population_risk_value(w, teacher, moments);
  report.gram_gap = (gram(w.weights) - teacher_gram(teacher)).norm();
  if (spans_symmetric(labeled).spans) {
    report.recovered_gram_gap = recover_gram_discrepancy(labeled, w, teacher).m_hat.norm();
  }
  report.rank_deficient = !is_full_column_rank(w.weights);
  if (!report.rank_deficient) {
    report.verdict =
        certify_stationary_global_empirical(w, teacher, labeled, trajectory.grad_tol, gram_tol)
            .verdict;
  }
  return report;
}

RefinementCheck epsilon_refinement(const StudentWeights& initial, const Problem& problem,
                                   const Moments& moments, GDConfig config) {
  if (!problem.dataset) throw InvalidArgument("epsilon_refinement needs a dataset");
  config.objective = BarrierMode::empirical;
  RefinementCheck check;
  const Trajectory coarse = gradient_descent(initial, problem, config);
  check.coarse = epsilon_stationarity_report(coarse, problem.teacher, *problem.dataset, moments);
  config.grad_tol /= 10.0;
  const Trajectory fine = gradient_descent(initial, problem, config);
  check.fine = epsilon_stationarity_report(fine, problem.teacher, *problem.dataset, moments);
  check.empirical_risk_decreased = check.fine.empirical_risk < check.coarse.empirical_risk;
  check.population_risk_decreased = check.fine.population_risk < check.coarse.population_risk;
  return check;
}

}  // namespace quadland
