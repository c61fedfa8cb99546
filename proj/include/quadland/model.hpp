#pragma once

#include <functional>
#include <optional>
#include <string>

#include "quadland/linalg.hpp"
#include "quadland/rng.hpp"

namespace quadland {

// sigma(z) = alpha z^2 + beta z + gamma. The default is the pure square.
struct Activation {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;

  bool is_default() const { return alpha == 1.0 && beta == 0.0 && gamma == 0.0; }
  double operator()(double z) const { return (alpha * z + beta) * z + gamma; }
  double derivative(double z) const { return 2.0 * alpha * z + beta; }
};

// Planted network. Row j of `weights` is the weight vector of neuron j; the
// output is sum_j a_j sigma(<W_j, x>).
class TeacherModel {
 public:
  explicit TeacherModel(Matrix weights, Activation activation = {},
                        std::optional<Vector> output_weights = std::nullopt);

  const Matrix& weights() const { return weights_; }
  const Activation& activation() const { return activation_; }
  const Vector& output_weights() const { return output_weights_; }
  bool has_unit_output_weights() const;

  Eigen::Index width() const { return weights_.rows(); }
  Eigen::Index dim() const { return weights_.cols(); }

 private:
  Matrix weights_;
  Activation activation_;
  Vector output_weights_;
};

// Student weights; the width may differ from the teacher's.
struct StudentWeights {
  Matrix weights;

  StudentWeights() = default;
  explicit StudentWeights(Matrix w);

  Eigen::Index width() const { return weights.rows(); }
  Eigen::Index dim() const { return weights.cols(); }
};

// A = (W*)^T W* - W^T W, symmetric d x d.
class Discrepancy {
 public:
  // Throws InvalidArgument unless `a` is square and symmetric to 1e-12 relative.
  static Discrepancy from_matrix(const Matrix& a);

  const Matrix& matrix() const { return a_; }
  Eigen::Index dim() const { return a_.rows(); }

 private:
  explicit Discrepancy(Matrix a) : a_(std::move(a)) {}
  Matrix a_;
};

double forward(const TeacherModel& model, const Vector& x);
double forward(const StudentWeights& student, const Vector& x);
// Unit output weights, arbitrary activation.
double forward(const Matrix& weights, const Activation& activation, const Vector& x);

// Row j scaled by sqrt(a_j) so that output weights become all ones.
TeacherModel absorb_output_weights(const TeacherModel& model);

// Gram of the teacher after absorbing output weights: sum_j a_j W_j W_j^T.
Matrix teacher_gram(const TeacherModel& model);

Discrepancy discrepancy(const TeacherModel& teacher, const StudentWeights& student);

// Second and fourth coordinate moments and the constants derived from them.
struct Moments {
  double mu2 = 0.0;
  double mu4 = 0.0;
  double var_sq = 0.0;   // Var(X^2) = mu4 - mu2^2
  double c_lower = 0.0;  // min{mu4 - mu2^2, 2 mu2^2}
  double c_upper = 0.0;  // max{mu4 - mu2^2, 2 mu2^2}
  bool degenerate = false;
  // Set when the moments were estimated by sampling.
  std::optional<double> mu2_stderr;
  std::optional<double> mu4_stderr;

  // Validates mu2 > 0 and mu4 >= mu2^2 (up to rounding).
  static Moments from(double mu2, double mu4);
};

// Coordinate law of the data (and of random teachers). Built-in laws are
// symmetric about zero; custom laws carry their own sampler.
class Distribution {
 public:
  enum class Kind { gaussian, uniform, rademacher, custom };
  using Sampler = std::function<double(CounterRng&)>;

  static Distribution gaussian(double sigma = 1.0);
  // Uniform on [-half_width, half_width].
  static Distribution uniform(double half_width);
  static Distribution rademacher();
  static Distribution custom(double mu2, double mu4, Sampler sampler,
                             std::string name = "custom");

  // Parses "gaussian", "gaussian(2)", "uniform" (unit variance), "uniform(a)",
  // "rademacher".
  static Distribution parse(const std::string& tag);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string tag() const;

  double sample(CounterRng& rng) const;
  bool has_sampler() const { return kind_ != Kind::custom || static_cast<bool>(sampler_); }

  double custom_mu2() const { return custom_mu2_; }
  double custom_mu4() const { return custom_mu4_; }

 private:
  Distribution() = default;
  Kind kind_ = Kind::gaussian;
  double parameter_ = 1.0;
  double custom_mu2_ = 0.0;
  double custom_mu4_ = 0.0;
  std::string name_;
  Sampler sampler_;
};

Moments moments_of(const Distribution& dist);

// Moments of X conditioned on |X| <= threshold. Custom laws are estimated by
// sampling `samples` draws (standard errors reported).
Moments truncated_moments(const Distribution& dist, double threshold,
                          std::uint64_t seed = 0x5EED, std::size_t samples = 1000000);

// Conditional moments of N(0, sigma^2) given |X| <= threshold by adaptive
// Gauss-Kronrod quadrature (relative tolerance 1e-10).
Moments truncated_gaussian_moments_quadrature(double sigma, double threshold);

}  // namespace quadland
