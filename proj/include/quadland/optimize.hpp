#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quadland/data.hpp"
#include "quadland/landscape.hpp"
#include "quadland/model.hpp"

namespace quadland {

// A differentiable risk in the student weights together with the barrier and
// sublevel-norm bound that apply to it.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Matrix& w) const = 0;
  virtual Matrix gradient(const Matrix& w) const = 0;
  virtual BarrierMode kind() const = 0;
  // Energy barrier of the teacher under this risk.
  virtual double barrier() const = 0;
  // Upper bound on ||W||_F for any W with value(W) <= risk.
  virtual double norm_bound(double risk) const = 0;
};

class EmpiricalObjective final : public Objective {
 public:
  // The dataset must be labeled by `teacher`.
  EmpiricalObjective(Dataset dataset, const TeacherModel& teacher);

  double value(const Matrix& w) const override;
  Matrix gradient(const Matrix& w) const override;
  BarrierMode kind() const override { return BarrierMode::empirical; }
  double barrier() const override { return barrier_; }
  double norm_bound(double risk) const override;

  const Dataset& dataset() const { return dataset_; }
  // True when ||(1/N) sum X X^T - mu2 I|| <= mu2 / 2, the event under which
  // the moment-based norm bound applies.
  bool covariance_event() const { return covariance_event_; }

 private:
  Dataset dataset_;
  double barrier_ = 0.0;
  double mu2_ = 0.0;
  double teacher_fro_sq_ = 0.0;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  bool covariance_event_ = false;
};

class PopulationObjective final : public Objective {
 public:
  PopulationObjective(TeacherModel teacher, Moments moments);

  double value(const Matrix& w) const override;
  Matrix gradient(const Matrix& w) const override;
  BarrierMode kind() const override { return BarrierMode::population; }
  double barrier() const override { return barrier_; }
  // L >= (E X^T A X)^2 = mu2^2 tr(A)^2 gives ||W||_F^2 <= sqrt(L)/mu2 + ||W*||_F^2.
  double norm_bound(double risk) const override;

 private:
  TeacherModel teacher_;
  Moments moments_;
  double barrier_ = 0.0;
  double teacher_fro_sq_ = 0.0;
};

struct SmoothnessOptions {
  int max_iterations = 30;
  double relative_tolerance = 1e-3;
  std::uint64_t seed = 0x517;
};

// Power-iteration estimate of the Hessian spectral norm at `w`, using
// central-difference Hessian-vector products of the gradient.
double estimate_smoothness(const Matrix& w, const Objective& objective,
                           const SmoothnessOptions& options = {});

struct FixedStep {
  double eta = 1e-3;
};
// eta = 1 / (safety * L_hat) with L_hat re-estimated every `refresh` iterations.
struct InverseSmoothnessStep {
  double safety = 4.0;
  int refresh = 50;
};
struct BacktrackingStep {
  double shrink = 0.5;
  double slope = 1e-4;
  double initial = 1.0;
};
using StepPolicy = std::variant<FixedStep, InverseSmoothnessStep, BacktrackingStep>;

struct GDConfig {
  BarrierMode objective = BarrierMode::empirical;
  StepPolicy step = BacktrackingStep{};
  double grad_tol = 1e-8;
  long max_iters = 1000000;
  long record_every = 100;
  // Validates the ranges of every field; throws InvalidArgument.
  void validate() const;
};

enum class Termination { grad_tol, max_iters, nonfinite };
std::string to_string(Termination t);

struct IterateRecord {
  long iteration = 0;
  double risk = 0.0;
  double grad_norm = 0.0;
  double sigma_min = 0.0;
  double fro_norm = 0.0;
  double step = 0.0;
  bool below_barrier = false;
};

struct Trajectory {
  std::vector<IterateRecord> records;
  StudentWeights final_weights;
  Termination termination = Termination::max_iters;
  long iterations = 0;
  double final_risk = 0.0;
  double final_grad_norm = 0.0;
  double barrier = 0.0;
  double grad_tol = 0.0;
  // Over every iterate, recorded or not.
  double min_sigma_min = 0.0;
  double max_risk_increase = 0.0;
  long fallback_steps = 0;  // inverse-smoothness steps that needed backtracking
};

// Data for either objective; the one named by GDConfig::objective must be set.
struct Problem {
  TeacherModel teacher;
  std::optional<Dataset> dataset;  // labeled, for the empirical objective
  std::optional<Moments> moments;  // for the population objective
};

std::unique_ptr<Objective> make_objective(const Problem& problem, BarrierMode kind);

// Plain gradient descent W <- W - eta grad R(W). Stops at ||grad|| <= grad_tol
// or max_iters; non-finite values abort with Termination::nonfinite. Under the
// backtracking and inverse-smoothness policies every accepted step satisfies
// the Armijo inequality, otherwise ContractViolation is thrown. The sublevel
// norm bound is checked on each recorded iterate below the barrier.
Trajectory gradient_descent(const StudentWeights& initial, const Problem& problem,
                            const GDConfig& config);
Trajectory gradient_descent(const StudentWeights& initial, const Objective& objective,
                            const GDConfig& config);

struct StationarityReport {
  double epsilon = 0.0;
  double empirical_risk = 0.0;
  double population_risk = 0.0;
  double gram_gap = 0.0;            // ||W^T W - (W*)^T W*||_F, direct
  std::optional<double> recovered_gram_gap;  // via residual least squares, if the data spans
  bool rank_deficient = false;
  std::optional<Verdict> verdict;  // absent for rank-deficient endpoints
};

// The endpoint must have terminated on grad_tol. The verdict uses the run's
// grad_tol and `gram_tol` on the empirical certificate.
StationarityReport epsilon_stationarity_report(const Trajectory& trajectory,
                                               const TeacherModel& teacher,
                                               const Dataset& dataset, const Moments& moments,
                                               double gram_tol = 1e-6);

struct RefinementCheck {
  StationarityReport coarse;
  StationarityReport fine;  // the same run with grad_tol / 10
  bool empirical_risk_decreased = false;
  bool population_risk_decreased = false;
};

// Runs the empirical objective twice, at grad_tol and grad_tol / 10.
RefinementCheck epsilon_refinement(const StudentWeights& initial, const Problem& problem,
                                   const Moments& moments, GDConfig config);

}  // namespace quadland
