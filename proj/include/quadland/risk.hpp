#pragma once

#include <optional>

#include "quadland/data.hpp"
#include "quadland/linalg.hpp"
#include "quadland/model.hpp"

namespace quadland {

struct RiskReport {
  double value = 0.0;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  std::optional<double> gradient_norm;
};

// (1/N) sum_i (Y_i - f(W; X_i))^2. The student shares `activation` with unit
// output weights.
double empirical_risk(const StudentWeights& student, const Dataset& dataset,
                      const Activation& activation = {});

// Gradient of empirical_risk with respect to the student weights. For the
// default activation this is W * (4/N) sum_i r_i X_i X_i^T, r_i = f(W;X_i) - Y_i.
Matrix empirical_gradient(const StudentWeights& student, const Dataset& dataset,
                          const Activation& activation = {});

// Residuals f(W; X_i) - Y_i.
Vector empirical_residuals(const StudentWeights& student, const Dataset& dataset,
                           const Activation& activation = {});

// Closed form
//   L = mu2^2 tr(A)^2 + 2 mu2^2 tr(A^2) + (mu4 - 3 mu2^2) tr(A o A)
// with the sandwich
//   mu2^2 tr(A)^2 + c_lower tr(A^2) <= L <= mu2^2 tr(A)^2 + c_upper tr(A^2).
RiskReport population_risk(const Discrepancy& discrepancy, const Moments& moments);

// Scalar-only convenience for (teacher, student).
double population_risk_value(const StudentWeights& student, const TeacherModel& teacher,
                             const Moments& moments);

// grad L(W) = 4 [ (mu4 - 3 mu2^2) W (D - D*) + mu2^2 (|W|_F^2 - |W*|_F^2) W
//                 + 2 mu2^2 W (W^T W - W*^T W*) ],
// D and D* the diagonal parts of the two Grams. Its zero set is the
// stationarity equation of the population risk.
Matrix population_gradient(const StudentWeights& student, const TeacherModel& teacher,
                           const Moments& moments);

}  // namespace quadland
