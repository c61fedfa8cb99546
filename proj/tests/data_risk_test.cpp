#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "quadland/data.hpp"
#include "quadland/errors.hpp"
#include "quadland/risk.hpp"
#include "quadland/rng.hpp"
#include "support/oracles.hpp"

using namespace quadland;

TEST(Dataset, SameSeedBitIdentical) {
  const Dataset a = sample_dataset(Distribution::gaussian(1.0), 5, 3, 7);
  const Dataset b = sample_dataset(Distribution::gaussian(1.0), 5, 3, 7);
  EXPECT_EQ(a.inputs, b.inputs);
  const Dataset c = sample_dataset(Distribution::gaussian(1.0), 5, 3, 8);
  EXPECT_NE(a.inputs, c.inputs);
}

TEST(Dataset, RademacherEntriesAreSigns) {
  const Dataset a = sample_dataset(Distribution::rademacher(), 200, 4, 1);
  EXPECT_TRUE((a.inputs.array().abs() == 1.0).all());
  EXPECT_GT((a.inputs.array() > 0).count(), 300);
  EXPECT_GT((a.inputs.array() < 0).count(), 300);
}

TEST(Dataset, GaussianFourthMomentWithinThreeStandardErrors) {
  const Dataset a = sample_dataset(Distribution::gaussian(1.0), 1'000'000, 1, 3);
  const Eigen::ArrayXd x4 = a.inputs.col(0).array().pow(4);
  const double mean = x4.mean();
  const double se = std::sqrt((x4 - mean).square().mean() / x4.size());
  EXPECT_LE(std::abs(mean - 3.0), 3.0 * se);
}

TEST(Dataset, LabelsZeroTeacher) {
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 10, 3, 1),
                                  TeacherModel(Matrix::Zero(2, 3)));
  EXPECT_EQ(a.labels->cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dataset, LabelsIdentityTeacherAreSquaredNorms) {
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 10, 3, 1),
                                  TeacherModel(Matrix::Identity(3, 3)));
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_NEAR((*a.labels)(i), a.inputs.row(i).squaredNorm(), 1e-14);
  }
}

TEST(Dataset, LabelsMatchLoopOracle) {
  CounterRng rng(5);
  const Matrix w = oracle::gaussian_matrix(4, 3, rng);
  const Dataset a = label_dataset(sample_dataset(Distribution::uniform(1.0), 20, 3, 2), TeacherModel(w));
  for (Eigen::Index i = 0; i < 20; ++i) {
    double expected = 0.0;
    for (int j = 0; j < 4; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += w(j, k) * a.inputs(i, k);
      expected += dot * dot;
    }
    EXPECT_NEAR((*a.labels)(i), expected, 1e-12 * (1 + expected));
  }
}

TEST(Dataset, CsvRoundTripPreservesEverything) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset a = sample_dataset(Distribution::parse(seed % 2 ? "uniform(2)" : "gaussian(0.5)"),
                               1 + seed, 1 + seed % 3, seed * 977);
    if (seed % 3 == 0) a = label_dataset(a, TeacherModel(Matrix::Ones(2, a.dim())));
    std::stringstream io;
    write_dataset_csv(io, a);
    const Dataset b = read_dataset_csv(io);
    EXPECT_EQ(b.inputs, a.inputs);
    EXPECT_EQ(b.labeled(), a.labeled());
    if (a.labeled()) EXPECT_EQ(*b.labels, *a.labels);
    EXPECT_EQ(b.seed, a.seed);
    ASSERT_TRUE(b.distribution.has_value());
    EXPECT_EQ(b.distribution->tag(), a.distribution->tag());
  }
}

TEST(Dataset, CsvRejectsRaggedRows) {
  std::stringstream io("# n=2 d=2 dist=deterministic seed=0\n1,2\n3\n");
  EXPECT_THROW(read_dataset_csv(io), InvalidArgument);
}

TEST(EmpiricalRisk, TeacherHasZeroRisk) {
  CounterRng rng(1);
  const Matrix w = oracle::gaussian_matrix(5, 4, rng);
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 50, 4, 1), TeacherModel(w));
  EXPECT_LE(empirical_risk(StudentWeights(w), a), 1e-20);
  EXPECT_LE(empirical_gradient(StudentWeights(w), a).norm(), 1e-10);
}

TEST(EmpiricalRisk, HandExample) {
  Dataset a;
  a.inputs = Matrix(2, 1);
  a.inputs << 1.0, 2.0;
  a = label_dataset(a, TeacherModel(Matrix::Ones(1, 1)));
  EXPECT_DOUBLE_EQ(empirical_risk(StudentWeights(Matrix::Zero(1, 1)), a), 8.5);
}

TEST(EmpiricalRisk, MatchesLoopOracle) {
  CounterRng rng(2);
  const Matrix ws = oracle::gaussian_matrix(3, 3, rng);
  const Matrix w = oracle::gaussian_matrix(5, 3, rng);
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 40, 3, 9), TeacherModel(ws));
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 40; ++i) {
    double f = 0.0;
    for (int j = 0; j < 5; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += w(j, k) * a.inputs(i, k);
      f += dot * dot;
    }
    expected += ((*a.labels)(i) - f) * ((*a.labels)(i) - f);
  }
  expected /= 40.0;
  EXPECT_NEAR(empirical_risk(StudentWeights(w), a), expected, 1e-12 * expected);
}

TEST(EmpiricalRisk, UnlabeledDataRejected) {
  const Dataset a = sample_dataset(Distribution::gaussian(1.0), 4, 2, 1);
  EXPECT_THROW(empirical_risk(StudentWeights(Matrix::Identity(2, 2)), a), InvalidArgument);
}

TEST(EmpiricalGradient, ZeroResidualsGiveZero) {
  // A different factor with the same Gram interpolates exactly.
  CounterRng rng(3);
  const Matrix w = oracle::gaussian_matrix(3, 3, rng);
  Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(3, 3, rng));
  const Matrix q = qr.householderQ();
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 30, 3, 4), TeacherModel(w));
  EXPECT_LE(empirical_gradient(StudentWeights(q * w), a).norm(), 1e-10);
}

class EmpiricalGradientFd : public ::testing::TestWithParam<int> {};

TEST_P(EmpiricalGradientFd, MatchesCentralDifferences) {
  CounterRng rng(100 + GetParam());
  const Eigen::Index d = 2 + GetParam() % 3;
  const Eigen::Index m = d + GetParam() % 4;
  const Matrix ws = oracle::gaussian_matrix(m, d, rng);
  const Matrix w = oracle::gaussian_matrix(m + 1, d, rng);
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 20, d, GetParam()),
                                  TeacherModel(ws));
  const Matrix g = empirical_gradient(StudentWeights(w), a);
  const Matrix fd = oracle::fd_gradient(
      [&](const Matrix& v) { return empirical_risk(StudentWeights(v), a); }, w);
  EXPECT_LE((g - fd).norm(), 1e-6 * g.norm());
}

INSTANTIATE_TEST_SUITE_P(Random, EmpiricalGradientFd, ::testing::Range(0, 50));

TEST(EmpiricalGradient, GeneralActivationMatchesFiniteDifferences) {
  CounterRng rng(17);
  const Activation act{0.7, -0.4, 1.1};
  const Matrix ws = oracle::gaussian_matrix(3, 2, rng);
  const Matrix w = oracle::gaussian_matrix(4, 2, rng);
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 25, 2, 5),
                                  TeacherModel(ws, act));
  const Matrix g = empirical_gradient(StudentWeights(w), a, act);
  const Matrix fd = oracle::fd_gradient(
      [&](const Matrix& v) { return empirical_risk(StudentWeights(v), a, act); }, w);
  EXPECT_LE((g - fd).norm(), 1e-6 * g.norm());
}

TEST(PopulationRisk, ZeroDiscrepancy) {
  const RiskReport r = population_risk(Discrepancy::from_matrix(Matrix::Zero(3, 3)),
                                       moments_of(Distribution::uniform(1.0)));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(*r.lower_bound, 0.0);
  EXPECT_EQ(*r.upper_bound, 0.0);
}

TEST(PopulationRisk, GaussianCollapse) {
  CounterRng rng(4);
  const Moments g = moments_of(Distribution::gaussian(1.0));
  for (int t = 0; t < 1000; ++t) {
    const Matrix a = oracle::random_symmetric(1 + t % 6, rng);
    const double tr = a.trace();
    const double expected = tr * tr + 2.0 * (a * a).trace();
    const RiskReport r = population_risk(Discrepancy::from_matrix(a), g);
    EXPECT_LE(std::abs(r.value - expected), 1e-12 * expected);
    EXPECT_LE(std::abs(*r.lower_bound - expected), 1e-12 * expected);
    EXPECT_LE(std::abs(*r.upper_bound - expected), 1e-12 * expected);
  }
}

TEST(PopulationRisk, MatchesIndexExpansion) {
  CounterRng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = oracle::random_symmetric(1 + t % 5, rng);
    const double mu2 = 0.2 + rng.uniform_open();
    const double mu4 = mu2 * mu2 * (1.0 + 4.0 * rng.uniform_open());
    const double expected = oracle::brute_force_population_risk(a, mu2, mu4);
    const double value = population_risk(Discrepancy::from_matrix(a), Moments::from(mu2, mu4)).value;
    EXPECT_NEAR(value, expected, 1e-12 * (1 + std::abs(expected)));
  }
}

TEST(PopulationRisk, SandwichAndNonnegativity) {
  CounterRng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const Matrix a = oracle::random_symmetric(1 + t % 6, rng);
    const double mu2 = 0.1 + 2.0 * rng.uniform_open();
    const double mu4 = mu2 * mu2 * (1.0 + 5.0 * rng.uniform_open());
    const RiskReport r = population_risk(Discrepancy::from_matrix(a), Moments::from(mu2, mu4));
    const double scale = 1e-12 * (1 + r.value);
    EXPECT_GE(r.value - *r.lower_bound, -scale);
    EXPECT_GE(*r.upper_bound - r.value, -scale);
    EXPECT_GE(r.value, 0.0);
  }
}

TEST(PopulationRisk, UniformMatchesMonteCarlo) {
  CounterRng rng(7);
  const Distribution u = Distribution::uniform(std::sqrt(3.0));
  const Matrix a = oracle::random_symmetric(3, rng);
  const auto mc = oracle::monte_carlo_population_risk(a, u, 1'000'000, 77);
  const double value = population_risk(Discrepancy::from_matrix(a), moments_of(u)).value;
  EXPECT_LE(std::abs(value - mc.mean), 4.0 * mc.stderr_);
}

TEST(PopulationRisk, DependsOnlyOnGram) {
  CounterRng rng(8);
  const Moments mom = moments_of(Distribution::uniform(1.0));
  for (int t = 0; t < 50; ++t) {
    const TeacherModel teacher(oracle::gaussian_matrix(4, 3, rng));
    const Matrix w = oracle::gaussian_matrix(5, 3, rng);
    Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(5, 5, rng));
    const Matrix q = qr.householderQ();
    const double l1 = population_risk_value(StudentWeights(w), teacher, mom);
    const double l2 = population_risk_value(StudentWeights(q * w), teacher, mom);
    EXPECT_LE(std::abs(l1 - l2), 1e-10 * l1);
  }
}

TEST(PopulationRisk, ZeroValueMeansZeroDiscrepancy) {
  CounterRng rng(9);
  const Matrix w = oracle::gaussian_matrix(3, 3, rng);
  const TeacherModel teacher(w);
  const Moments mom = moments_of(Distribution::uniform(1.0));
  const RiskReport r = population_risk(discrepancy(teacher, StudentWeights(w)), mom);
  EXPECT_LE(r.value, 1e-20);
  EXPECT_LE(discrepancy(teacher, StudentWeights(w)).matrix().norm(), 1e-8);
}

TEST(PopulationGradient, ZeroOnOrbit) {
  CounterRng rng(10);
  const Matrix ws = oracle::gaussian_matrix(4, 3, rng);
  Eigen::HouseholderQR<Matrix> qr(oracle::gaussian_matrix(4, 4, rng));
  const Matrix q = qr.householderQ();
  const Moments mom = moments_of(Distribution::uniform(1.0));
  EXPECT_EQ(population_gradient(StudentWeights(ws), TeacherModel(ws), mom).norm(), 0.0);
  EXPECT_LE(population_gradient(StudentWeights(q * ws), TeacherModel(ws), mom).norm(), 1e-10);
}

class PopulationGradientFd : public ::testing::TestWithParam<int> {};

TEST_P(PopulationGradientFd, MatchesCentralDifferences) {
  CounterRng rng(200 + GetParam());
  const Eigen::Index d = 2 + GetParam() % 3;
  const TeacherModel teacher(oracle::gaussian_matrix(d + 1, d, rng));
  const Matrix w = oracle::gaussian_matrix(d + GetParam() % 3, d, rng);
  const Moments mom = Moments::from(0.5 + rng.uniform_open(), 2.0 + 3.0 * rng.uniform_open());
  const Matrix g = population_gradient(StudentWeights(w), teacher, mom);
  const Matrix fd = oracle::fd_gradient(
      [&](const Matrix& v) { return population_risk_value(StudentWeights(v), teacher, mom); }, w);
  EXPECT_LE((g - fd).norm(), 1e-6 * g.norm());
}

INSTANTIATE_TEST_SUITE_P(Random, PopulationGradientFd, ::testing::Range(0, 50));

TEST(Concentration, EmpiricalApproachesPopulation) {
  CounterRng rng(11);
  const TeacherModel teacher(oracle::gaussian_matrix(5, 4, rng));
  const StudentWeights w(oracle::gaussian_matrix(5, 4, rng));
  const Dataset a = label_dataset(sample_dataset(Distribution::gaussian(1.0), 100'000, 4, 12), teacher);
  const double emp = empirical_risk(w, a);
  const double pop = population_risk_value(w, teacher, moments_of(Distribution::gaussian(1.0)));
  EXPECT_LE(std::abs(emp - pop), 0.05 * pop);
}
