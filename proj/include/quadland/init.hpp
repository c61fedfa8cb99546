#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quadland/data.hpp"
#include "quadland/landscape.hpp"
#include "quadland/model.hpp"

namespace quadland {

struct TeacherSample {
  TeacherModel teacher;
  bool full_rank = false;
  double sigma_min = 0.0;
};

// m x d teacher with i.i.d. entries from `dist`, row-major from one stream.
TeacherSample sample_teacher(const Distribution& dist, Eigen::Index m, Eigen::Index d,
                             std::uint64_t seed);

// W* = U diag(sqrt(m (1 + spread u_i))) V^T with U (m x d) and V (d x d)
// Haar-orthonormal and u_i uniform on [-1, 1]: a teacher whose Gram is within
// a relative `spread` of m I, i.e. close to the identity initialization.
// Requires 0 <= spread < 1.
TeacherSample sample_conditioned_teacher(Eigen::Index m, Eigen::Index d, double spread,
                                         std::uint64_t seed);

// Teacher from a tag: any distribution tag, or "conditioned(<spread>)".
TeacherSample sample_teacher(const std::string& tag, Eigen::Index m, Eigen::Index d,
                             std::uint64_t seed);

enum class InitScale { m, m_plus_4d };
std::string to_string(InitScale scale);
InitScale parse_init_scale(const std::string& text);
double init_gamma(Eigen::Index m, Eigen::Index d, InitScale scale);

// W0 = [sqrt(gamma) I_d; 0], so W0^T W0 = gamma I_d.
StudentWeights identity_init(Eigen::Index m, Eigen::Index d, InitScale scale);

// Risk of `init` (closed-form population risk, or empirical risk on `dataset`
// in empirical mode) against the matching energy barrier. In empirical mode
// the barrier moments are the truncated moments of the dataset.
BarrierReport check_init_below_barrier(const StudentWeights& init, const TeacherModel& teacher,
                                       const Moments& moments, BarrierMode mode,
                                       const std::optional<Dataset>& dataset = std::nullopt);

// Population risk of W0 = identity_init(m, d, InitScale::m) computed from the
// eigenvalues of A = (W*)^T W* - m I (tr A = sum lambda, tr A^2 = sum lambda^2)
// and the diagonal of A for the fourth-moment correction.
double init_risk_eigen_route(const TeacherModel& teacher, const Moments& moments);

struct SpectrumReport {
  double lambda_min = 0.0;  // of (W*)^T W*
  double lambda_max = 0.0;
  // (1/d) sum mu_i^2 over the eigenvalues of ((W*)^T W* - m I) / (2 sqrt(m d)).
  double scaled_second_moment = 0.0;
  double band_low = 0.0;  // sqrt(m) - 2 sqrt(d), on singular values
  double band_high = 0.0;
  bool inside_band = false;  // sigma_min > band_low and sigma_max < band_high
};

SpectrumReport wishart_spectrum_report(const TeacherModel& teacher);

// Second moment of the semicircle law on [-1, 1], by quadrature: 1/4.
double semicircle_second_moment();

struct InitTrial {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  BarrierReport barrier;
  SpectrumReport spectrum;
};

struct InitSweep {
  Eigen::Index m = 0;
  Eigen::Index d = 0;
  InitScale scale = InitScale::m;
  double below_fraction = 0.0;
  double second_moment_fraction = 0.0;  // within [0.225, 0.275]
  double band_fraction = 0.0;
  std::vector<InitTrial> trials;
};

// Per trial: a teacher drawn from `teacher_dist`, the identity initialization
// checked against the population barrier of `data_moments`, and the spectrum
// report. Trials are ordered by index.
InitSweep init_sweep(const Distribution& teacher_dist, const Moments& data_moments,
                     Eigen::Index m, Eigen::Index d, InitScale scale, std::size_t trials,
                     std::uint64_t seed, unsigned jobs = 1);

}  // namespace quadland
