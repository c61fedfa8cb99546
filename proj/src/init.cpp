#include "quadland/init.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <regex>

#include "quadland/errors.hpp"
#include "quadland/parallel.hpp"
#include "quadland/risk.hpp"
#include "quadland/rng.hpp"

namespace quadland {

namespace {

void require_shape(Eigen::Index m, Eigen::Index d) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  if (m < d) throw InvalidArgument("need m >= d");
}

TeacherSample finish(Matrix w) {
  TeacherSample s{TeacherModel(std::move(w)), false, 0.0};
  s.full_rank = is_full_column_rank(s.teacher.weights());
  s.sigma_min = sigma_min(s.teacher.weights());
  return s;
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.standard_normal();
  return g;
}

// Haar orthonormal columns: thin QR with the sign of R's diagonal fixed.
Matrix haar_columns(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  const Matrix g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

TeacherSample sample_teacher(const Distribution& dist, Eigen::Index m, Eigen::Index d,
                             std::uint64_t seed) {
  require_shape(m, d);
  CounterRng rng(seed);
  Matrix w(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = dist.sample(rng);
  return finish(std::move(w));
}

TeacherSample sample_conditioned_teacher(Eigen::Index m, Eigen::Index d, double spread,
                                         std::uint64_t seed) {
  require_shape(m, d);
  if (!(spread >= 0.0 && spread < 1.0)) throw InvalidArgument("spread must lie in [0, 1)");
  CounterRng rng(seed);
  const Matrix u = haar_columns(m, d, rng);
  const Matrix v = haar_columns(d, d, rng);
  Vector s(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    s(i) = std::sqrt(static_cast<double>(m) * (1.0 + spread * (2.0 * rng.uniform_open() - 1.0)));
  }
  return finish(u * s.asDiagonal() * v.transpose());
}

TeacherSample sample_teacher(const std::string& tag, Eigen::Index m, Eigen::Index d,
                             std::uint64_t seed) {
  static const std::regex conditioned(R"(\s*conditioned\s*(?:\(\s*([^)]*?)\s*\))?\s*)");
  std::smatch match;
  if (std::regex_match(tag, match, conditioned)) {
    double spread = 0.1;
    if (match[1].matched && !match[1].str().empty()) {
      try {
        std::size_t used = 0;
        spread = std::stod(match[1].str(), &used);
        if (used != match[1].str().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InvalidArgument("bad spread in '" + tag + "'");
      }
    }
    return sample_conditioned_teacher(m, d, spread, seed);
  }
  return sample_teacher(Distribution::parse(tag), m, d, seed);
}

std::string to_string(InitScale scale) { return scale == InitScale::m ? "m" : "m_plus_4d"; }

InitScale parse_init_scale(const std::string& text) {
  if (text == "m") return InitScale::m;
  if (text == "m_plus_4d" || text == "m+4d") return InitScale::m_plus_4d;
  throw InvalidArgument("unknown init scale '" + text + "'");
}

double init_gamma(Eigen::Index m, Eigen::Index d, InitScale scale) {
  return static_cast<double>(scale == InitScale::m ? m : m + 4 * d);
}

StudentWeights identity_init(Eigen::Index m, Eigen::Index d, InitScale scale) {
  require_shape(m, d);
  Matrix w = Matrix::Zero(m, d);
  const double root = std::sqrt(init_gamma(m, d, scale));
  for (Eigen::Index i = 0; i < d; ++i) w(i, i) = root;
  return StudentWeights(std::move(w));
}

BarrierReport check_init_below_barrier(const StudentWeights& init, const TeacherModel& teacher,
                                       const Moments& moments, BarrierMode mode,
                                       const std::optional<Dataset>& dataset) {
  BarrierReport report;
  report.constant_used = mode;
  report.sigma_min_teacher = sigma_min(absorb_output_weights(teacher).weights());
  if (mode == BarrierMode::population) {
    report.barrier_value = energy_barrier(teacher, moments, mode);
    report.risk_value = population_risk_value(init, teacher, moments);
  } else {
    if (!dataset) throw InvalidArgument("empirical init check needs a dataset");
    const Dataset labeled = dataset->labeled() ? *dataset : label_dataset(*dataset, teacher);
    report.barrier_value = energy_barrier(teacher, barrier_moments(labeled), mode);
    report.risk_value = empirical_risk(init, labeled);
  }
  report.below = report.risk_value < report.barrier_value;
  return report;
}

double init_risk_eigen_route(const TeacherModel& teacher, const Moments& moments) {
  const Matrix g = teacher_gram(teacher);
  const double m = static_cast<double>(teacher.width());
  const Matrix a = g - m * Matrix::Identity(g.rows(), g.cols());
  const Vector lambda = symmetric_eigenvalues(a);
  const double tr = lambda.sum();
  const double tr_sq = lambda.squaredNorm();
  const double diag_sq = a.diagonal().squaredNorm();
  const double mu2_sq = moments.mu2 * moments.mu2;
  return mu2_sq * tr * tr + 2.0 * mu2_sq * tr_sq + (moments.mu4 - 3.0 * mu2_sq) * diag_sq;
}

SpectrumReport wishart_spectrum_report(const TeacherModel& teacher) {
  const Eigen::Index m = teacher.width();
  const Eigen::Index d = teacher.dim();
  require_shape(m, d);
  const Vector lambda = symmetric_eigenvalues(teacher_gram(teacher));
  SpectrumReport r;
  r.lambda_min = lambda(0);
  r.lambda_max = lambda(d - 1);
  const double md = static_cast<double>(m) * static_cast<double>(d);
  const Vector mu = (lambda.array() - static_cast<double>(m)) / (2.0 * std::sqrt(md));
  r.scaled_second_moment = mu.squaredNorm() / static_cast<double>(d);
  const double root_m = std::sqrt(static_cast<double>(m));
  const double root_d = std::sqrt(static_cast<double>(d));
  r.band_low = root_m - 2.0 * root_d;
  r.band_high = root_m + 2.0 * root_d;
  const double s_min = std::sqrt(std::max(0.0, r.lambda_min));
  const double s_max = std::sqrt(std::max(0.0, r.lambda_max));
  r.inside_band = s_min > r.band_low && s_max < r.band_high;
  return r;
}

double semicircle_second_moment() {
  using boost::math::quadrature::gauss_kronrod;
  const double pi = boost::math::constants::pi<double>();
  auto density = [pi](double x) { return x * x * (2.0 / pi) * std::sqrt(std::max(0.0, 1.0 - x * x)); };
  return gauss_kronrod<double, 61>::integrate(density, -1.0, 1.0, 25, 1e-14);
}

InitSweep init_sweep(const Distribution& teacher_dist, const Moments& data_moments,
                     Eigen::Index m, Eigen::Index d, InitScale scale, std::size_t trials,
                     std::uint64_t seed, unsigned jobs) {
  require_shape(m, d);
  InitSweep sweep;
  sweep.m = m;
  sweep.d = d;
  sweep.scale = scale;
  sweep.trials.resize(trials);
  const StudentWeights init = identity_init(m, d, scale);
  parallel_for(trials, jobs, [&](std::size_t t) {
    InitTrial& trial = sweep.trials[t];
    trial.index = t;
    trial.seed = derive_seed(seed, t);
    const TeacherSample teacher = sample_teacher(teacher_dist, m, d, trial.seed);
    trial.spectrum = wishart_spectrum_report(teacher.teacher);
    if (teacher.full_rank) {
      trial.barrier = check_init_below_barrier(init, teacher.teacher, data_moments,
                                               BarrierMode::population);
    }
  });
  std::size_t below = 0, moment = 0, band = 0;
  for (const auto& t : sweep.trials) {
    below += t.barrier.below;
    moment += t.spectrum.scaled_second_moment >= 0.225 && t.spectrum.scaled_second_moment <= 0.275;
    band += t.spectrum.inside_band;
  }
  if (trials > 0) {
    const double n = static_cast<double>(trials);
    sweep.below_fraction = below / n;
    sweep.second_moment_fraction = moment / n;
    sweep.band_fraction = band / n;
  }
  return sweep;
}

}  // namespace quadland
