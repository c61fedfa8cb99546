#include "quadland/geometry.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <set>

#include "quadland/errors.hpp"
#include "quadland/landscape.hpp"
#include "quadland/parallel.hpp"
#include "quadland/risk.hpp"

namespace quadland {

namespace {

constexpr std::array<std::uint64_t, 8> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19};

// Column pairs in design order: (k,k) for all k, then (k,l) for k < l.
std::vector<std::pair<Eigen::Index, Eigen::Index>> design_pairs(Eigen::Index d) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(d * (d + 1) / 2));
  for (Eigen::Index k = 0; k < d; ++k) pairs.emplace_back(k, k);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = k + 1; l < d; ++l) pairs.emplace_back(k, l);
  return pairs;
}

}  // namespace

Eigen::Index critical_sample_count(Eigen::Index d) {
  if (d < 1) throw InvalidArgument("critical_sample_count: need d >= 1");
  return d * (d + 1) / 2;
}

TensorizedDesign tensorize(const Matrix& inputs) {
  const Eigen::Index d = inputs.cols();
  const auto pairs = design_pairs(d);
  TensorizedDesign design;
  design.d = d;
  design.xi.resize(inputs.rows(), static_cast<Eigen::Index>(pairs.size()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      design.xi(i, static_cast<Eigen::Index>(c)) =
          inputs(i, pairs[c].first) * inputs(i, pairs[c].second);
    }
  }
  return design;
}

TensorizedDesign tensorize(const Dataset& dataset) { return tensorize(dataset.inputs); }

Vector sym_vector(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("sym_vector: matrix must be square");
  const auto pairs = design_pairs(m.rows());
  Vector v(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto [k, l] = pairs[c];
    v(static_cast<Eigen::Index>(c)) = k == l ? m(k, k) : m(k, l) + m(l, k);
  }
  return v;
}

Matrix sym_matrix(const Vector& v, Eigen::Index d) {
  const auto pairs = design_pairs(d);
  if (v.size() != static_cast<Eigen::Index>(pairs.size())) {
    throw InvalidArgument("sym_matrix: vector length must be d(d+1)/2");
  }
  Matrix m(d, d);
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    const auto [k, l] = pairs[c];
    const double x = v(static_cast<Eigen::Index>(c));
    if (k == l) {
      m(k, k) = x;
    } else {
      m(k, l) = m(l, k) = 0.5 * x;
    }
  }
  return m;
}

SpanReport spans_symmetric(const Matrix& inputs) {
  const TensorizedDesign design = tensorize(inputs);
  const Eigen::Index n = design.xi.rows(), dim = design.xi.cols();
  SpanReport report;
  if (n > 0) {
    report.rank = numerical_rank(design.xi, 1e-10 * static_cast<double>(std::max(n, dim)));
  }
  report.spans = report.rank == dim;
  return report;
}

SpanReport spans_symmetric(const Dataset& dataset) { return spans_symmetric(dataset.inputs); }

Dataset prime_vandermonde_data(Eigen::Index d, Eigen::Index n) {
  if (n < 1 || d < 1) throw InvalidArgument("prime_vandermonde_data: need n >= 1 and d >= 1");
  if (d > static_cast<Eigen::Index>(kPrimes.size())) {
    throw InvalidArgument(
        "prime_vandermonde_data: d <= 8 keeps the construction exact; use random "
        "continuous data (sample_dataset) for larger d");
  }
  Dataset ds;
  ds.inputs.resize(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double power = 1.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      ds.inputs(t, k) = power;
      power *= static_cast<double>(kPrimes[static_cast<std::size_t>(k)]);
    }
  }
  if (!ds.inputs.allFinite()) {
    throw InvalidArgument("prime_vandermonde_data: entries overflow double; reduce n");
  }
  return ds;
}

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

int exact_rank(std::vector<std::vector<cpp_rational>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  int rank = 0;
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < cols && pivot_row < rows; ++c) {
    std::size_t p = pivot_row;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[pivot_row]);
    for (std::size_t r = pivot_row + 1; r < rows; ++r) {
      if (a[r][c] == 0) continue;
      const cpp_rational f = a[r][c] / a[pivot_row][c];
      for (std::size_t j = c; j < cols; ++j) a[r][j] -= f * a[pivot_row][j];
    }
    ++pivot_row;
    ++rank;
  }
  return rank;
}

}  // namespace

PrimeSpanCertificate prime_vandermonde_certificate(Eigen::Index d, Eigen::Index n) {
  const Dataset data = prime_vandermonde_data(d, n);
  PrimeSpanCertificate cert;
  cert.d = d;
  cert.n = n;
  const auto pairs = design_pairs(d);

  std::set<std::vector<int>> exponents;
  std::set<std::uint64_t> nodes;
  for (const auto& [k, l] : pairs) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    ++e[static_cast<std::size_t>(k)];
    ++e[static_cast<std::size_t>(l)];
    exponents.insert(e);
    nodes.insert(kPrimes[static_cast<std::size_t>(k)] * kPrimes[static_cast<std::size_t>(l)]);
  }
  cert.distinct_exponents = exponents.size() == pairs.size();
  cert.distinct_nodes = nodes.size() == pairs.size();

  // Row t of the design is (p_k p_l)^t, t = 0..n-1, in exact integers.
  std::vector<std::vector<cpp_rational>> xi(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    auto& row = xi[static_cast<std::size_t>(t)];
    for (const auto& [k, l] : pairs) {
      const cpp_int node = cpp_int(kPrimes[static_cast<std::size_t>(k)]) *
                           kPrimes[static_cast<std::size_t>(l)];
      row.emplace_back(boost::multiprecision::pow(node, static_cast<unsigned>(t)));
    }
  }
  cert.exact_rank = exact_rank(std::move(xi));
  cert.double_rank = spans_symmetric(data).rank;
  // Diagonal scaling leaves the rank unchanged but removes the t-th power
  // growth of the rows, which otherwise buries sigma_min under rounding.
  Matrix scaled = tensorize(data).xi;
  for (int sweep = 0; sweep < 20; ++sweep) {
    for (Eigen::Index c = 0; c < scaled.cols(); ++c) scaled.col(c) /= scaled.col(c).norm();
    for (Eigen::Index r = 0; r < scaled.rows(); ++r) scaled.row(r) /= scaled.row(r).norm();
  }
  cert.equilibrated_rank = numerical_rank(
      scaled, 1e-10 * static_cast<double>(std::max(scaled.rows(), scaled.cols())));
  cert.spans = cert.exact_rank == static_cast<int>(pairs.size());
  return cert;
}

NullInterpolatorResult null_interpolator(const TeacherModel& teacher, const Matrix& inputs,
                                         const Moments& moments, Eigen::Index target_rows,
                                         std::optional<double> delta) {
  const Eigen::Index d = teacher.dim();
  if (inputs.cols() != d) throw InvalidArgument("null_interpolator: dimension mismatch");
  const Matrix w_star = absorb_output_weights(teacher).weights();
  if (!is_full_column_rank(w_star)) throw InvalidArgument("teacher weights must have rank d");
  if (target_rows < d) throw InvalidArgument("null_interpolator: need target_rows >= d");

  const Eigen::Index dim = critical_sample_count(d);
  Vector direction = Vector::Zero(dim);
  if (inputs.rows() == 0) {
    direction(0) = 1.0;  // no constraints: e_1 e_1^T
  } else {
    if (spans_symmetric(inputs).spans) {
      throw NoNullDirection("data spans all symmetric matrices; every interpolator is exact");
    }
    const TensorizedDesign design = tensorize(inputs);
    Eigen::JacobiSVD<Matrix> svd(design.xi, Eigen::ComputeFullV);
    direction = svd.matrixV().col(dim - 1);
  }
  Matrix m = sym_matrix(direction, d);
  const Vector eig = symmetric_eigenvalues(m);
  m /= std::max(std::abs(eig(0)), std::abs(eig(d - 1)));

  const double s = sigma_min(w_star);
  const double s2 = s * s;
  const double step = delta.value_or(s2);
  if (!(step > 0.0) || step > s2 * (1.0 + 1e-12)) {
    throw InvalidArgument("null_interpolator: delta must lie in (0, sigma_min(W*)^2]");
  }

  NullInterpolatorResult result;
  result.delta = step;
  result.direction = m;
  result.student = embed_gram(gram(w_star) + step * m, target_rows);

  auto& cert = result.certificate;
  cert.spectral_norm = symmetric_eigenvalues(m).cwiseAbs().maxCoeff();
  if (inputs.rows() > 0) {
    Dataset data;
    data.inputs = inputs;
    data = label_dataset(data, teacher);
    cert.empirical_risk = empirical_risk(result.student, data);
    const double scale = std::max(1.0, data.labels->squaredNorm() / static_cast<double>(inputs.rows()));
    cert.interpolates = cert.empirical_risk <= 1e-10 * scale;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      const auto x = inputs.row(i);
      cert.max_quadratic_form = std::max(cert.max_quadratic_form, std::abs(x.dot(m * x.transpose())));
    }
  } else {
    cert.interpolates = true;
  }
  cert.population_risk = population_risk(discrepancy(teacher, result.student), moments).value;
  cert.lower_bound = moments.c_lower * step * step;
  cert.above_lower_bound = cert.population_risk >= cert.lower_bound - 1e-9;
  return result;
}

NullInterpolatorResult null_interpolator(const TeacherModel& teacher, const Dataset& dataset,
                                         const Moments& moments, Eigen::Index target_rows,
                                         std::optional<double> delta) {
  return null_interpolator(teacher, dataset.inputs, moments, target_rows, delta);
}

GramRecovery recover_gram_discrepancy(const Dataset& dataset, const StudentWeights& student,
                                      const TeacherModel& teacher) {
  if (dataset.dim() != teacher.dim() || student.dim() != teacher.dim()) {
    throw InvalidArgument("recover_gram_discrepancy: dimension mismatch");
  }
  if (!spans_symmetric(dataset).spans) {
    throw IllPosed("tensorized design is rank deficient; Xi^T Xi is not invertible");
  }
  const Dataset labeled = dataset.labeled() ? dataset : label_dataset(dataset, teacher);
  const Vector v = empirical_residuals(student, labeled);
  const TensorizedDesign design = tensorize(dataset);
  const Vector coeffs = design.xi.colPivHouseholderQr().solve(v);
  GramRecovery out;
  out.m_hat = sym_matrix(coeffs, dataset.dim());
  out.residual_norm = (design.xi * coeffs - v).norm();
  return out;
}

TensorizedCovariance tensorized_covariance(const Dataset& dataset) {
  if (dataset.size() < 1) throw InvalidArgument("tensorized_covariance: need N >= 1");
  const TensorizedDesign design = tensorize(dataset);
  TensorizedCovariance out;
  out.sigma_hat = (design.xi.transpose() * design.xi) / static_cast<double>(dataset.size());
  out.sigma_hat = 0.5 * (out.sigma_hat + out.sigma_hat.transpose());
  const Vector eig = symmetric_eigenvalues(out.sigma_hat);
  out.min_eig = eig(0);
  out.max_eig = eig(eig.size() - 1);
  out.rank = numerical_rank(out.sigma_hat,
                            1e-10 * static_cast<double>(std::max(dataset.size(), design.xi.cols())));
  return out;
}

SampleComplexityResult sample_complexity_scan(const Distribution& dist, Eigen::Index d,
                                              std::size_t trials, std::uint64_t seed,
                                              unsigned jobs) {
  if (trials < 1) throw InvalidArgument("sample_complexity_scan: need trials >= 1");
  SampleComplexityResult out;
  out.d = d;
  out.n_star = critical_sample_count(d);
  out.at_n_star.resize(trials);
  out.below.resize(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(seed, t);
    out.at_n_star[t] = spans_symmetric(sample_dataset(dist, out.n_star, d, s));
    if (out.n_star > 1) {
      out.below[t] = spans_symmetric(sample_dataset(dist, out.n_star - 1, d, s));
    }
  });
  std::size_t hits = 0, below_hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    hits += out.at_n_star[t].spans;
    below_hits += out.below[t].spans;
  }
  out.spans_fraction_at_n_star = static_cast<double>(hits) / static_cast<double>(trials);
  out.spans_fraction_below = static_cast<double>(below_hits) / static_cast<double>(trials);
  return out;
}

}  // namespace quadland
