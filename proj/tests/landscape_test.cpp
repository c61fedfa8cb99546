#include <gtest/gtest.h>

#include <cmath>

#include "quadland/errors.hpp"
#include "quadland/landscape.hpp"
#include "quadland/risk.hpp"
#include "support/oracles.hpp"

using namespace quadland;

namespace {

const Moments kGauss = moments_of(Distribution::gaussian(1.0));

Matrix diag_teacher(double a, double b, Eigen::Index m) {
  Matrix w = Matrix::Zero(m, 2);
  w(0, 0) = a;
  w(1, 1) = b;
  return w;
}

}  // namespace

TEST(Barrier, IdentityTeacherGaussian) {
  EXPECT_DOUBLE_EQ(energy_barrier(TeacherModel(Matrix::Identity(3, 3)), kGauss, BarrierMode::population), 2.0);
  EXPECT_DOUBLE_EQ(
      energy_barrier(TeacherModel(Matrix::Identity(3, 3)), kGauss, BarrierMode::population, 3.0), 18.0);
}

TEST(Barrier, EmbeddedDiagonalTeacher) {
  EXPECT_NEAR(energy_barrier(TeacherModel(diag_teacher(2, 1, 5)), kGauss, BarrierMode::population), 2.0,
              1e-14);
}

TEST(Barrier, ScalesWithSquaredAlpha) {
  CounterRng rng(1);
  const Matrix w = oracle::gaussian_matrix(6, 3, rng);
  const double plain = energy_barrier(TeacherModel(w), kGauss, BarrierMode::population);
  const double scaled = energy_barrier(TeacherModel(w, Activation{3, 1, -2}), kGauss, BarrierMode::population);
  EXPECT_LE(std::abs(scaled - 9.0 * plain), 1e-12 * scaled);
}

TEST(Barrier, EmpiricalUsesHalfTheTruncatedConstant) {
  CounterRng rng(2);
  const TeacherModel t(oracle::gaussian_matrix(5, 3, rng));
  const Dataset data = sample_dataset(Distribution::gaussian(1.0), 50, 3, 4);
  const Moments trunc = barrier_moments(data);
  const double expected = 0.5 * trunc.c_lower * std::pow(sigma_min(t.weights()), 4);
  EXPECT_NEAR(energy_barrier(t, trunc, BarrierMode::empirical), expected, 1e-12 * expected);
  EXPECT_LT(trunc.mu2, 1.0);
}

TEST(Barrier, Errors) {
  EXPECT_THROW(energy_barrier(TeacherModel(Matrix::Identity(2, 2)), moments_of(Distribution::rademacher()),
                              BarrierMode::population),
               DegenerateDistribution);
  Matrix deficient = Matrix::Zero(3, 2);
  deficient(0, 0) = 1.0;
  EXPECT_THROW(energy_barrier(TeacherModel(deficient), kGauss, BarrierMode::population), InvalidArgument);
  Dataset unknown;
  unknown.inputs = Matrix::Ones(3, 2);
  EXPECT_THROW(barrier_moments(unknown), InvalidArgument);
}

TEST(Barrier, PowerThreshold) { EXPECT_DOUBLE_EQ(power_threshold(4, 0.5), 2.0); }

TEST(WorstRankDeficient, DiagonalTeacherHitsThreeSigmaFourth) {
  const TeacherModel t(diag_teacher(2, 1, 2));
  const StudentWeights w = worst_rank_deficient(t);
  const Vector spectrum = symmetric_eigenvalues(discrepancy(t, w).matrix());
  EXPECT_NEAR(spectrum(0), 0.0, 1e-12);
  EXPECT_NEAR(spectrum(1), 1.0, 1e-12);
  EXPECT_NEAR(population_risk_value(w, t, kGauss), 3.0, 1e-12);
}

TEST(WorstRankDeficient, ScaledIdentityBetweenBarrierAndBound) {
  for (double s : {0.5, 1.0, 3.0}) {
    Matrix w = Matrix::Zero(4, 2);
    w.topRows(2) = s * Matrix::Identity(2, 2);
    const TeacherModel t(w);
    const double risk = population_risk_value(worst_rank_deficient(t), t, kGauss);
    const double s4 = s * s * s * s;
    EXPECT_GE(risk, 2.0 * s4 - 1e-9);
    EXPECT_LE(risk, 3.0 * s4 + 1e-9);
    EXPECT_NEAR(tightness_bound(t, kGauss), 3.0 * s4, 1e-12 * s4);
  }
}

TEST(WorstRankDeficient, RankContractAndGramPreservation) {
  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const Eigen::Index m = d + 1 + t % 4;
    const TeacherModel teacher(oracle::gaussian_matrix(m, d, rng));
    const StudentWeights w = worst_rank_deficient(teacher);
    ASSERT_EQ(w.width(), m);
    const Vector sv = singular_values(w.weights);  // descending
    EXPECT_LE(sv(d - 1), kRankTolerance * std::max(1.0, sv(0)));
    EXPECT_GT(sv(d - 2), kRankTolerance * std::max(1.0, sv(0)));
    // Row splitting must not change the function: compare with the square root.
    const Matrix g = teacher_gram(teacher);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    Matrix bar = Matrix::Zero(d, d);
    for (Eigen::Index j = 1; j < d; ++j) {
      bar += std::sqrt(eig.eigenvalues()(j)) * eig.eigenvectors().col(j) * eig.eigenvectors().col(j).transpose();
    }
    for (int s = 0; s < 100; ++s) {
      const Vector x = oracle::gaussian_matrix(d, 1, rng);
      const double f = forward(StudentWeights(bar), x);
      EXPECT_LE(std::abs(forward(w, x) - f), 1e-10 * (1 + f));
    }
    const double risk = population_risk_value(w, teacher, kGauss);
    EXPECT_LE(risk, tightness_bound(teacher, kGauss) + 1e-9 * (1 + risk));
    EXPECT_GE(risk, energy_barrier(teacher, kGauss, BarrierMode::population) - 1e-9 * (1 + risk));
  }
}

TEST(WorstRankDeficient, SquareTeacherUsesAllRows) {
  const TeacherModel t(diag_teacher(3, 1, 2));
  const StudentWeights w = worst_rank_deficient(t);
  EXPECT_EQ(w.width(), 2);
  EXPECT_NEAR(population_risk_value(w, t, kGauss), 3.0, 1e-12);
}

TEST(EmbedGram, IdentityAndZero) {
  const StudentWeights i = embed_gram(Matrix::Identity(3, 3), 5);
  EXPECT_LE((gram(i.weights) - Matrix::Identity(3, 3)).norm(), 1e-14);
  EXPECT_EQ(i.width(), 5);
  EXPECT_EQ(i.weights.bottomRows(2).norm(), 0.0);
  EXPECT_LE((i.weights.topRows(3) - Matrix::Identity(3, 3)).norm(), 1e-14);
  EXPECT_EQ(embed_gram(Matrix::Zero(3, 3), 3).weights.norm(), 0.0);
}

TEST(EmbedGram, RandomPsdReconstruction) {
  CounterRng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Matrix f = oracle::gaussian_matrix(2 + t % 4, 4, rng);
    const Matrix g = f.transpose() * f;
    EXPECT_LE((gram(embed_gram(g, 4 + t % 3).weights) - g).norm(), 1e-10 * (1 + g.norm()));
  }
}

TEST(EmbedGram, Errors) {
  EXPECT_THROW(embed_gram(-Matrix::Identity(2, 2), 2), InvalidArgument);
  EXPECT_THROW(embed_gram(Matrix::Identity(3, 3), 2), InvalidArgument);
}

TEST(Certificate, OrbitIsGlobalOptimum) {
  CounterRng rng(5);
  const Matrix ws = oracle::gaussian_matrix(4, 3, rng);
  Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(4, 4, rng));
  const Matrix q = qr.householderQ();
  const auto cert = certify_stationary_global(StudentWeights(q * ws), TeacherModel(ws), kGauss, 1e-8, 1e-8);
  EXPECT_EQ(cert.verdict, Verdict::global_optimum);
  EXPECT_LE(cert.gram_gap, 1e-10 * (1 + ws.squaredNorm()));
  EXPECT_TRUE(cert.is_full_rank);
}

TEST(Certificate, WorstRankDeficientIsBarrierProtected) {
  CounterRng rng(6);
  const TeacherModel t(oracle::gaussian_matrix(5, 3, rng));
  const auto cert = certify_stationary_global(worst_rank_deficient(t), t, kGauss, 1e-8, 1e-8);
  EXPECT_FALSE(cert.is_full_rank);
  EXPECT_EQ(cert.verdict, Verdict::barrier_protected);
  EXPECT_GE(cert.risk, cert.barrier);
}

TEST(Certificate, NonStationaryFullRankIsInconclusive) {
  const TeacherModel t(Matrix::Identity(2, 2));
  const auto cert = certify_stationary_global(StudentWeights(2.0 * Matrix::Identity(2, 2)), t, kGauss, 1e-8, 1e-8);
  EXPECT_EQ(cert.verdict, Verdict::inconclusive);
}

TEST(Certificate, EmpiricalVersion) {
  CounterRng rng(7);
  const Matrix ws = oracle::gaussian_matrix(3, 2, rng);
  const Dataset data = label_dataset(sample_dataset(Distribution::gaussian(1.0), 20, 2, 3), TeacherModel(ws));
  const auto cert = certify_stationary_global_empirical(StudentWeights(ws), TeacherModel(ws), data, 1e-8, 1e-8);
  EXPECT_EQ(cert.verdict, Verdict::global_optimum);
  EXPECT_EQ(to_string(cert.verdict), "global-optimum");
}

TEST(Sweep, IdentityTeacherRespectsBarrier) {
  const SweepResult r = rank_deficient_sweep(TeacherModel(Matrix::Identity(3, 3)), kGauss, 500, 1);
  EXPECT_TRUE(r.holds);
  EXPECT_GE(r.min_risk_found, 2.0 - 1e-9);
  for (const auto& t : r.trials) EXPECT_LE(t.rank, 2);
}

TEST(Sweep, HomogeneityUnderTeacherScaling) {
  const SweepResult one = rank_deficient_sweep(TeacherModel(Matrix::Identity(3, 3)), kGauss, 200, 9);
  const SweepResult two = rank_deficient_sweep(TeacherModel(2.0 * Matrix::Identity(3, 3)), kGauss, 200, 9);
  EXPECT_GE(two.min_risk_found, 32.0 - 1e-9);
  EXPECT_NEAR(two.min_risk_found, 16.0 * one.min_risk_found, 1e-9 * two.min_risk_found);
}

TEST(Sweep, DeterministicAndThreadIndependent) {
  CounterRng rng(8);
  const TeacherModel t(oracle::gaussian_matrix(8, 3, rng));
  const SweepResult a = rank_deficient_sweep(t, kGauss, 1, 5);
  const SweepResult b = rank_deficient_sweep(t, kGauss, 1, 5);
  EXPECT_EQ(a.min_risk_found, b.min_risk_found);
  const SweepResult serial = rank_deficient_sweep(t, kGauss, 40, 3, 1);
  const SweepResult threaded = rank_deficient_sweep(t, kGauss, 40, 3, 4);
  ASSERT_EQ(serial.trials.size(), threaded.trials.size());
  for (std::size_t i = 0; i < serial.trials.size(); ++i) {
    EXPECT_EQ(serial.trials[i].risk, threaded.trials[i].risk);
    EXPECT_EQ(threaded.trials[i].index, i);
  }
}

TEST(Sweep, NonGaussianMomentsRespectBarrier) {
  CounterRng rng(9);
  const Moments uni = moments_of(Distribution::uniform(1.0));
  const TeacherModel t(oracle::gaussian_matrix(6, 3, rng));
  const SweepResult r = rank_deficient_sweep(t, uni, 300, 2);
  EXPECT_TRUE(r.holds);
  EXPECT_GE(population_risk_value(worst_rank_deficient(t), t, uni), r.barrier - 1e-9);
}

TEST(SublevelBound, PopulationAndDataForms) {
  // At risk 0 the data form gives ||W||^2 <= (lambda_max / lambda_min) ||W*||^2.
  EXPECT_DOUBLE_EQ(sublevel_norm_bound_data(0.0, 1.0, 1.0, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(sublevel_norm_bound(0.0, 1.0, 4.0, 0.5), std::sqrt(12.0));
  EXPECT_GT(sublevel_norm_bound(1.0, 1.0, 4.0), sublevel_norm_bound(0.0, 1.0, 4.0));
}
