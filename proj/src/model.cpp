#include "quadland/model.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <regex>
#include <sstream>

#include "quadland/errors.hpp"

namespace quadland {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (got " << got << ", expected " << want << ")";
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

TeacherModel::TeacherModel(Matrix weights, Activation activation,
                           std::optional<Vector> output_weights)
    : weights_(std::move(weights)), activation_(activation) {
  require_finite(weights_, "teacher weights");
  if (!activation_.is_default() && activation_.alpha == 0.0) {
    throw InvalidArgument("activation must have alpha != 0");
  }
  if (output_weights) {
    require_dim(output_weights->size(), weights_.rows(), "output weights");
    for (Eigen::Index j = 0; j < output_weights->size(); ++j) {
      const double a = (*output_weights)(j);
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw InvalidArgument("output weights must be strictly positive");
      }
    }
    output_weights_ = std::move(*output_weights);
  } else {
    output_weights_ = Vector::Ones(weights_.rows());
  }
}

bool TeacherModel::has_unit_output_weights() const {
  return (output_weights_.array() == 1.0).all();
}

StudentWeights::StudentWeights(Matrix w) : weights(std::move(w)) {
  require_finite(weights, "student weights");
}

Discrepancy Discrepancy::from_matrix(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("discrepancy must be square");
  if (!is_symmetric(a, 1e-12)) throw InvalidArgument("discrepancy must be symmetric");
  return Discrepancy(0.5 * (a + a.transpose()));
}

double forward(const Matrix& weights, const Activation& activation, const Vector& x) {
  require_dim(x.size(), weights.cols(), "forward");
  const Vector z = weights * x;
  if (activation.is_default()) return z.squaredNorm();
  double out = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) out += activation(z(j));
  return out;
}

double forward(const TeacherModel& model, const Vector& x) {
  require_dim(x.size(), model.dim(), "forward");
  const Vector z = model.weights() * x;
  const Vector& a = model.output_weights();
  double out = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) out += a(j) * model.activation()(z(j));
  return out;
}

double forward(const StudentWeights& student, const Vector& x) {
  return forward(student.weights, Activation{}, x);
}

TeacherModel absorb_output_weights(const TeacherModel& model) {
  if (model.has_unit_output_weights()) return model;
  Matrix scaled = model.output_weights().array().sqrt().matrix().asDiagonal() * model.weights();
  // The corollary folds a_j into the row only for the pure quadratic part;
  // lower-order terms would need a_j * beta, a_j * gamma, which a single
  // shared activation cannot express.
  if (model.activation().beta != 0.0 || model.activation().gamma != 0.0) {
    throw InvalidArgument("cannot absorb output weights with lower-order activation terms");
  }
  return TeacherModel(std::move(scaled), model.activation());
}

Matrix teacher_gram(const TeacherModel& model) {
  return gram(absorb_output_weights(model).weights());
}

Discrepancy discrepancy(const TeacherModel& teacher, const StudentWeights& student) {
  require_dim(student.dim(), teacher.dim(), "discrepancy");
  return Discrepancy::from_matrix(teacher_gram(teacher) - gram(student.weights));
}

// ---------------------------------------------------------------------------
// Moments and distributions

Moments Moments::from(double mu2, double mu4) {
  if (!(mu2 > 0.0) || !std::isfinite(mu2) || !std::isfinite(mu4)) {
    throw InvalidArgument("moments require finite mu2 > 0 and finite mu4");
  }
  const double sq = mu2 * mu2;
  if (mu4 < sq * (1.0 - 1e-12)) {
    throw InvalidArgument("moments violate mu4 >= mu2^2");
  }
  Moments m;
  m.mu2 = mu2;
  m.mu4 = mu4;
  m.var_sq = std::max(0.0, mu4 - sq);
  m.c_lower = std::min(m.var_sq, 2.0 * sq);
  m.c_upper = std::max(m.var_sq, 2.0 * sq);
  m.degenerate = m.var_sq <= 1e-12 * sq;
  if (m.degenerate) {
    m.var_sq = 0.0;
    m.c_lower = 0.0;
  }
  return m;
}

Distribution Distribution::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian: sigma must be positive");
  Distribution d;
  d.kind_ = Kind::gaussian;
  d.parameter_ = sigma;
  return d;
}

Distribution Distribution::uniform(double half_width) {
  if (!(half_width > 0.0)) throw InvalidArgument("uniform: half width must be positive");
  Distribution d;
  d.kind_ = Kind::uniform;
  d.parameter_ = half_width;
  return d;
}

Distribution Distribution::rademacher() {
  Distribution d;
  d.kind_ = Kind::rademacher;
  d.parameter_ = 1.0;
  return d;
}

Distribution Distribution::custom(double mu2, double mu4, Sampler sampler, std::string name) {
  Moments::from(mu2, mu4);  // validation only
  Distribution d;
  d.kind_ = Kind::custom;
  d.custom_mu2_ = mu2;
  d.custom_mu4_ = mu4;
  d.sampler_ = std::move(sampler);
  d.name_ = std::move(name);
  return d;
}

Distribution Distribution::parse(const std::string& tag) {
  static const std::regex pattern(R"(\s*([a-z]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*)");
  std::smatch match;
  if (!std::regex_match(tag, match, pattern)) {
    throw InvalidArgument("unrecognized distribution tag '" + tag + "'");
  }
  const std::string name = match[1];
  const bool has_arg = match[2].matched && !match[2].str().empty();
  double arg = 0.0;
  if (has_arg) {
    try {
      std::size_t used = 0;
      arg = std::stod(match[2].str(), &used);
      if (used != match[2].str().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("bad distribution parameter in '" + tag + "'");
    }
  }
  if (name == "gaussian" || name == "normal") return gaussian(has_arg ? arg : 1.0);
  if (name == "uniform") return uniform(has_arg ? arg : std::sqrt(3.0));
  if (name == "rademacher" && !has_arg) return rademacher();
  throw InvalidArgument("unrecognized distribution tag '" + tag + "'");
}

std::string Distribution::tag() const {
  switch (kind_) {
    case Kind::gaussian:
      return "gaussian(" + format_double(parameter_) + ")";
    case Kind::uniform:
      return "uniform(" + format_double(parameter_) + ")";
    case Kind::rademacher:
      return "rademacher";
    case Kind::custom:
      return name_ + "(" + format_double(custom_mu2_) + "," + format_double(custom_mu4_) + ")";
  }
  return "unknown";
}

double Distribution::sample(CounterRng& rng) const {
  switch (kind_) {
    case Kind::gaussian:
      return parameter_ * rng.standard_normal();
    case Kind::uniform:
      return parameter_ * (2.0 * rng.uniform_open() - 1.0);
    case Kind::rademacher:
      return (rng.next_u64() >> 63) ? 1.0 : -1.0;
    case Kind::custom:
      if (!sampler_) throw InvalidArgument("custom distribution has no sampler");
      return sampler_(rng);
  }
  return 0.0;
}

Moments moments_of(const Distribution& dist) {
  const double p = dist.parameter();
  switch (dist.kind()) {
    case Distribution::Kind::gaussian:
      return Moments::from(p * p, 3.0 * p * p * p * p);
    case Distribution::Kind::uniform:
      return Moments::from(p * p / 3.0, p * p * p * p / 5.0);
    case Distribution::Kind::rademacher:
      return Moments::from(1.0, 1.0);
    case Distribution::Kind::custom:
      return Moments::from(dist.custom_mu2(), dist.custom_mu4());
  }
  throw InvalidArgument("unknown distribution");
}

Moments truncated_gaussian_moments_quadrature(double sigma, double threshold) {
  using boost::math::quadrature::gauss_kronrod;
  const double a = threshold / sigma;
  auto integrate = [a](int power) {
    auto f = [power](double x) { return std::pow(x, power) * std::exp(-0.5 * x * x); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, a, 20, 1e-12);
  };
  const double i0 = integrate(0);
  if (!(i0 > 0.0)) throw InvalidArgument("truncation threshold has zero probability");
  const double s2 = sigma * sigma;
  return Moments::from(s2 * integrate(2) / i0, s2 * s2 * integrate(4) / i0);
}

namespace {

Moments truncated_gaussian_closed_form(double sigma, double threshold) {
  const double a = threshold / sigma;
  const double phi = std::exp(-0.5 * a * a) / std::sqrt(2.0 * boost::math::constants::pi<double>());
  const double i0 = std::erf(a / std::sqrt(2.0));
  // Integration by parts: I_{2k} = (2k-1) I_{2k-2} - 2 a^{2k-1} phi(a).
  const double i2 = i0 - 2.0 * a * phi;
  const double i4 = 3.0 * i2 - 2.0 * a * a * a * phi;
  const double s2 = sigma * sigma;
  return Moments::from(s2 * i2 / i0, s2 * s2 * i4 / i0);
}

Moments truncated_by_sampling(const Distribution& dist, double threshold, std::uint64_t seed,
                              std::size_t samples) {
  CounterRng rng(seed);
  CompensatedSum s2, s4, s8;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = dist.sample(rng);
    if (std::abs(x) > threshold) continue;
    const double x2 = x * x;
    s2.add(x2);
    s4.add(x2 * x2);
    s8.add(x2 * x2 * x2 * x2);
    ++kept;
  }
  if (kept == 0) throw InvalidArgument("truncation threshold has zero probability");
  const double n = static_cast<double>(kept);
  const double mu2 = s2.value() / n;
  const double mu4 = s4.value() / n;
  Moments m = Moments::from(mu2, mu4);
  if (kept > 1) {
    m.mu2_stderr = std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / n);
    m.mu4_stderr = std::sqrt(std::max(0.0, s8.value() / n - mu4 * mu4) / n);
  }
  return m;
}

}  // namespace

Moments truncated_moments(const Distribution& dist, double threshold, std::uint64_t seed,
                          std::size_t samples) {
  if (!(threshold > 0.0)) throw InvalidArgument("truncation threshold must be positive");
  switch (dist.kind()) {
    case Distribution::Kind::gaussian: {
      const double a = threshold / dist.parameter();
      if (a > 40.0) return moments_of(dist);
      // The recursion cancels catastrophically for small a.
      if (a < 0.5) return truncated_gaussian_moments_quadrature(dist.parameter(), threshold);
      return truncated_gaussian_closed_form(dist.parameter(), threshold);
    }
    case Distribution::Kind::uniform: {
      const double b = std::min(dist.parameter(), threshold);
      return Moments::from(b * b / 3.0, b * b * b * b / 5.0);
    }
    case Distribution::Kind::rademacher:
      if (threshold < 1.0) throw InvalidArgument("truncation threshold has zero probability");
      return moments_of(dist);
    case Distribution::Kind::custom:
      return truncated_by_sampling(dist, threshold, seed, samples);
  }
  throw InvalidArgument("unknown distribution");
}

}  // namespace quadland
