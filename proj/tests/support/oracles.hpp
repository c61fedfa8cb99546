#pragma once

// Independent reference computations used only by the tests: finite
// differences, Monte Carlo, brute-force expansions.

#include <cmath>
#include <cstdint>
#include <functional>

#include "quadland/linalg.hpp"
#include "quadland/model.hpp"
#include "quadland/rng.hpp"

namespace oracle {

using quadland::Matrix;
using quadland::Vector;

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, quadland::CounterRng& rng,
                              double scale = 1.0) {
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = scale * rng.standard_normal();
  return g;
}

inline Matrix random_symmetric(Eigen::Index d, quadland::CounterRng& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  return 0.5 * (g + g.transpose());
}

// Central differences with step h = 1e-5 (1 + |entry|).
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& w) {
  Matrix g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(w(i)));
    Matrix plus = w, minus = w;
    plus(i) += h;
    minus(i) -= h;
    g(i) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

// E[(X^T A X)^2] expanded over index quadruples: only pairings with every
// index repeated an even number of times survive.
inline double brute_force_population_risk(const Matrix& a, double mu2, double mu4) {
  const Eigen::Index d = a.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
          double moment = 0.0;
          if (i == j && j == k && k == l) {
            moment = mu4;
          } else if ((i == j && k == l) || (i == k && j == l) || (i == l && j == k)) {
            moment = mu2 * mu2;
          }
          total += a(i, j) * a(k, l) * moment;
        }
  return total;
}

struct MonteCarlo {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Sample mean and standard error of (X^T A X)^2 over n draws.
inline MonteCarlo monte_carlo_population_risk(const Matrix& a, const quadland::Distribution& dist,
                                              std::size_t n, std::uint64_t seed) {
  quadland::CounterRng rng(seed);
  const Eigen::Index d = a.rows();
  Vector x(d);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (Eigen::Index k = 0; k < d; ++k) x(k) = dist.sample(rng);
    const double q = x.dot(a * x);
    const double v = q * q;
    sum += v;
    sum_sq += v * v;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, sum_sq / nn - mean * mean);
  return {mean, std::sqrt(var / nn)};
}

}  // namespace oracle
