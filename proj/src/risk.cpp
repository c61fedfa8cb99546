#include "quadland/risk.hpp"

#include <cmath>
#include <vector>

#include "quadland/errors.hpp"

namespace quadland {

namespace {

void check_labeled(const StudentWeights& student, const Dataset& dataset) {
  if (!dataset.labeled()) throw InvalidArgument("empirical risk needs a labeled dataset");
  if (student.dim() != dataset.dim()) {
    throw InvalidArgument("student dimension does not match data");
  }
  if (dataset.size() == 0) throw InvalidArgument("empirical risk needs N >= 1");
}

}  // namespace

Vector empirical_residuals(const StudentWeights& student, const Dataset& dataset,
                           const Activation& activation) {
  check_labeled(student, dataset);
  const Vector& y = *dataset.labels;
  Vector r(dataset.size());
  if (activation.is_default()) {
    // f(W; x) = x^T (W^T W) x
    const Matrix g = gram(student.weights);
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
      const auto x = dataset.inputs.row(i);
      r(i) = x.dot(g * x.transpose()) - y(i);
    }
  } else {
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
      r(i) = forward(student.weights, activation, dataset.sample(i)) - y(i);
    }
  }
  return r;
}

double empirical_risk(const StudentWeights& student, const Dataset& dataset,
                      const Activation& activation) {
  const Vector r = empirical_residuals(student, dataset, activation);
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum.add(r(i) * r(i));
  return sum.value() / static_cast<double>(r.size());
}

Matrix empirical_gradient(const StudentWeights& student, const Dataset& dataset,
                          const Activation& activation) {
  const Vector r = empirical_residuals(student, dataset, activation);
  const Eigen::Index n = dataset.size(), d = dataset.dim();
  const double scale = 1.0 / static_cast<double>(n);
  if (activation.is_default()) {
    // S = sum_i r_i X_i X_i^T, accumulated entrywise with compensation.
    std::vector<CompensatedSum> acc(static_cast<std::size_t>(d * (d + 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::size_t idx = 0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double rk = r(i) * dataset.inputs(i, k);
        for (Eigen::Index l = k; l < d; ++l) acc[idx++].add(rk * dataset.inputs(i, l));
      }
    }
    Matrix s(d, d);
    std::size_t idx = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
      for (Eigen::Index l = k; l < d; ++l) s(k, l) = s(l, k) = acc[idx++].value();
    }
    return 4.0 * scale * (student.weights * s);
  }
  // d/dW_j (1/N) sum_i r_i^2 = (2/N) sum_i r_i sigma'(<W_j, X_i>) X_i
  Matrix grad = Matrix::Zero(student.width(), d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = dataset.sample(i);
    const Vector z = student.weights * x;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      grad.row(j) += (r(i) * activation.derivative(z(j))) * x.transpose();
    }
  }
  return 2.0 * scale * grad;
}

RiskReport population_risk(const Discrepancy& discrepancy, const Moments& moments) {
  const Matrix& a = discrepancy.matrix();
  const double mu2sq = moments.mu2 * moments.mu2;
  const double tr = a.trace();
  const double tr_sq = a.squaredNorm();                 // tr(A^2) for symmetric A
  const double tr_hadamard = a.diagonal().squaredNorm();  // tr(A o A)
  const double base = mu2sq * tr * tr;
  RiskReport report;
  report.value = base + 2.0 * mu2sq * tr_sq + (moments.mu4 - 3.0 * mu2sq) * tr_hadamard;
  report.lower_bound = base + moments.c_lower * tr_sq;
  report.upper_bound = base + moments.c_upper * tr_sq;
  return report;
}

double population_risk_value(const StudentWeights& student, const TeacherModel& teacher,
                             const Moments& moments) {
  return population_risk(discrepancy(teacher, student), moments).value;
}

Matrix population_gradient(const StudentWeights& student, const TeacherModel& teacher,
                           const Moments& moments) {
  if (student.dim() != teacher.dim()) {
    throw InvalidArgument("population_gradient: dimension mismatch");
  }
  const Matrix& w = student.weights;
  const Matrix g = gram(w);
  const Matrix g_star = teacher_gram(teacher);
  const double mu2sq = moments.mu2 * moments.mu2;
  const Vector diag_gap = g.diagonal() - g_star.diagonal();
  const double fro_gap = g.trace() - g_star.trace();
  Matrix grad = (moments.mu4 - 3.0 * mu2sq) * (w * diag_gap.asDiagonal());
  grad += mu2sq * fro_gap * w;
  grad += 2.0 * mu2sq * (w * (g - g_star));
  return 4.0 * grad;
}

}  // namespace quadland
