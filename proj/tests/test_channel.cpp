// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <gtest/gtest.h>

#include <numbers>
#include <tuple>

#include "test_util.hpp"

namespace starcf {
namespace {

using testing::rel_err;

double bessel_i_series(int nu, double x) {
  double sum = 0.0, term = std::pow(x / 2, nu);
  for (int j = 1; j <= nu; ++j) term /= j;
  for (int j = 0; j < 200; ++j) {
    sum += term;
    term *= (x / 2) * (x / 2) / ((j + 1.0) * (j + 1.0 + nu));
  }
  return sum;
}

TEST(RisCorrelation, DiagonalAndNeighbour) {
  const double lambda = 0.15, d = lambda / 4;
  const CMatrix R = ris_correlation(16, d, d, lambda);
  for (int n = 0; n < 16; ++n) EXPECT_NEAR(R(n, n).real(), d * d, 1e-18);
  // Horizontal neighbours sit lambda/4 apart: sinc(1/2) = 2/pi.
  EXPECT_NEAR(R(0, 1).real(), lambda * lambda / 16 * 2 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(R.trace().real(), 16 * d * d, 1e-15);
}

TEST(RisCorrelation, PositiveSemidefinite) {
  for (int N : {4, 16, 64}) {
    const double lambda = 0.15;
    const CMatrix R = ris_correlation(N, lambda / 4, lambda / 4, lambda);
    EXPECT_TRUE(is_hermitian(R));
    EXPECT_GE(min_eigenvalue(R), -1e-10 * R.trace().real()) << N;
  }
}

TEST(RisCorrelation, NonSquare) {
  try {
    ris_correlation(12, 0.01, 0.01, 0.15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSquareN);
  }
}

TEST(ApCorrelation, Cases) {
  const CMatrix one = ap_correlation(1, 0.3, 0.2);
  EXPECT_EQ(one.rows(), 1);
  EXPECT_NEAR(std::abs(one(0, 0) - cplx(1, 0)), 0.0, 1e-15);

  const CMatrix los = ap_correlation(2, 0.0, 0.0);
  EXPECT_NEAR((los - CMatrix::Ones(2, 2)).norm(), 0.0, 1e-15);

  for (double angle : {-2.0, -0.4, 0.0, 0.9, 2.5}) {
    const CMatrix R = ap_correlation(6, angle, 15 * std::numbers::pi / 180);
    for (int a = 0; a < 6; ++a) EXPECT_NEAR(std::abs(R(a, a) - cplx(1, 0)), 0.0, 1e-15);
    EXPECT_TRUE(is_hermitian(R));
    EXPECT_GE(min_eigenvalue(R), -1e-10 * 6);
  }
}

TEST(PhaseErrorCf, KnownValues) {
  EXPECT_DOUBLE_EQ(phase_error_cf(0.0), 0.0);
  EXPECT_NEAR(phase_error_cf(3.0), bessel_i_series(1, 3.0) / bessel_i_series(0, 3.0), 1e-12);
  EXPECT_NEAR(phase_error_cf(3.0), 0.8100, 5e-5);
  EXPECT_NEAR(phase_error_cf(1e6), 1.0, 1e-5);
  EXPECT_DOUBLE_EQ(phase_error_cf(std::numeric_limits<double>::infinity()), 1.0);
  // Both sides of the asymptotic switch agree.
  EXPECT_NEAR(phase_error_cf(699.999), phase_error_cf(700.001), 1e-8);
}

TEST(PhaseErrorCf, MonotoneOnGrid) {
  double prev = -1.0;
  for (int i = 0; i < 50; ++i) {
    const double v = phase_error_cf(0.2 * i);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(PhaseErrorCf, MatchesVonMisesSamples) {
  for (double kappa : {0.5, 1.0, 3.0}) {
    Rng rng = Rng::substream(11, Stream::kOracle, static_cast<std::uint64_t>(kappa * 10));
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += std::cos(sample_von_mises(rng, kappa));
    EXPECT_LT(rel_err(acc / n, phase_error_cf(kappa)), 0.01) << kappa;
  }
}

TEST(EffectiveRis, Limits) {
  Rng rng(3);
  const CMatrix X = rng.complex_normal_matrix(4, 4);
  const CMatrix G = X * X.adjoint();
  const CMatrix R_S = ris_correlation(4, 0.04, 0.04, 0.15);
  EXPECT_NEAR((effective_ris_matrices(R_S, G, 1.0).G_tilde - G).norm(), 0.0, 1e-12);
  const CMatrix d = effective_ris_matrices(R_S, G, 0.0).G_tilde;
  EXPECT_NEAR((d - CMatrix(G.diagonal().asDiagonal())).norm(), 0.0, 1e-12);
  EXPECT_NEAR((effective_ris_matrices(R_S, G, 0.0).R_S_tilde - CMatrix(R_S.diagonal().asDiagonal())).norm(), 0.0,
              1e-18);
}

TEST(EffectiveRis, MatchesPhaseErrorSampling) {
  Rng rng(5);
  const CMatrix X = rng.complex_normal_matrix(4, 4);
  const CMatrix G = X * X.adjoint();
  const double kappa = 3.0;
  const double vs = phase_error_cf(kappa);
  CMatrix acc = CMatrix::Zero(4, 4);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    CVector e(4);
    for (int a = 0; a < 4; ++a) e(a) = std::polar(1.0, sample_von_mises(rng, kappa));
    acc += e.asDiagonal() * G * e.conjugate().asDiagonal();
  }
  acc /= n;
  const CMatrix want = effective_ris_matrices(G, G, vs).G_tilde;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) EXPECT_LT(std::abs(acc(a, b) - want(a, b)), 0.015 * std::abs(G(a, b)));
}

TEST(LosSteering, Properties) {
  const double lambda = 0.15;
  const CVector broad = los_steering({1.0, 0.0, 0.0}, 16, lambda / 4, lambda / 4, lambda);
  EXPECT_NEAR((broad - CVector::Ones(16)).norm(), 0.0, 1e-12);
  const double s = std::sqrt(1.0 / 3);
  const CVector g = los_steering({s, s, s}, 16, lambda / 4, lambda / 4, lambda);
  for (int n = 0; n < 16; ++n) EXPECT_NEAR(std::abs(g(n)), 1.0, 1e-14);
  EXPECT_NEAR(g.squaredNorm(), 16.0, 1e-12);
}

TEST(Scene, CorrelationsHermitianPsdWithExpectedTraces) {
  const SystemConfig c = desk_config();
  const Scene s = make_scene(c);
  EXPECT_NEAR(s.corr.R_S.trace().real(), c.N * c.element_width() * c.element_height(), 1e-15);
  for (int m = 0; m < c.M; ++m) {
    EXPECT_TRUE(is_psd(s.corr.R_A[m]));
    for (int k = 0; k < c.K(); ++k) {
      const CMatrix& R = s.corr.R_d(m, k);
      EXPECT_TRUE(is_hermitian(R));
      EXPECT_GE(min_eigenvalue(R), -1e-10 * R.trace().real());
      EXPECT_LT(rel_err(R.trace().real(), c.L * s.ls.beta_d(m, k)), 1e-12);
    }
  }
}

TEST(Cascade, NoRisLeavesDirectLink) {
  SystemConfig c = testing::desk_ris();
  c.mode = Mode::kNoRis;
  const Scene s = make_scene(c);
  const PassiveBeamforming pbf = baseline_beamforming(c);
  for (int m = 0; m < c.M; ++m)
    for (int k = 0; k < c.K(); ++k) EXPECT_EQ(cascaded_covariance(s, pbf, k, m), s.corr.R_d(m, k));
}

TEST(Cascade, ReflectOnlyPairDropsTransmissionSide) {
  SystemConfig c = testing::desk_ris();
  c.mode = Mode::kReflectOnlyPair;
  const Scene s = make_scene(c);
  const PassiveBeamforming pbf = baseline_beamforming(c);
  for (int k = 0; k < c.K(); ++k) {
    if (ue_side(s, k) == Side::kTransmission) {
      EXPECT_EQ(cascade_power(s, pbf, k), 0.0);
    } else {
      EXPECT_GT(cascade_power(s, pbf, k), 0.0);
    }
  }
  EXPECT_THROW(ue_side(s, c.K()), Error);
}

// Sample covariance of the assembled channel against the analytic covariance.
class CascadeSampling : public ::testing::TestWithParam<std::tuple<double, double>> {};

TEST_P(CascadeSampling, MatchesSampleCovariance) {
  SystemConfig c;
  c.M = 1;
  c.L = 2;
  c.N = 4;
  c.K_R = 1;
  c.K_T = 1;
  c.tau_p = 2;
  c.cascade_gain_db = 150.0;
  c.direct_loss_db = 40.0;
  c.rician_db = std::get<0>(GetParam());
  c.vartheta = std::get<1>(GetParam());
  const Scene s = make_scene(c);
  const PassiveBeamforming pbf = baseline_beamforming(c);
  const Grid2<CMatrix> R = channel_covariances(s, pbf);

  const int n = 100000;
  Rng rng = Rng::substream(9, Stream::kOracle, 0);
  std::vector<CMatrix> acc(2, CMatrix::Zero(2, 2));
  std::vector<CVector> mean(2, CVector::Zero(2));
  for (int t = 0; t < n; ++t) {
    const ChannelRealization r = sample_channel(s, pbf, rng);
    for (int k = 0; k < 2; ++k) {
      acc[k] += r.f(0, k) * r.f(0, k).adjoint();
      mean[k] += r.f(0, k);
    }
  }
  for (int k = 0; k < 2; ++k) {
    const CMatrix S = acc[k] / n;
    const double tr = R(0, k).trace().real();
    // The surface path must carry real weight, otherwise this checks nothing.
    EXPECT_GT(tr, 2.0 * s.corr.R_d(0, k).trace().real());
    EXPECT_LT(rel_err(S.trace().real(), tr), 0.01) << "UE " << k;
    EXPECT_LT((S - R(0, k)).norm() / R(0, k).norm(), 0.02);
    // Zero mean within three standard errors per entry.
    const CVector mu = mean[k] / n;
    for (int l = 0; l < 2; ++l) EXPECT_LT(std::abs(mu(l)), 3.0 * std::sqrt(R(0, k)(l, l).real() / n));
  }
}

INSTANTIATE_TEST_SUITE_P(RicianAndPhaseErrors, CascadeSampling,
                         ::testing::Values(std::make_tuple(10.0, 3.0), std::make_tuple(-1e9, 3.0),
                                           std::make_tuple(10.0, 0.0),
                                           std::make_tuple(10.0, std::numeric_limits<double>::infinity())));

TEST(SampleChannel, ReconstructsFromParts) {
  const SystemConfig c = testing::desk_ris();
  const Scene s = make_scene(c);
  const PassiveBeamforming pbf = baseline_beamforming(c);
  Rng rng(17);
  const ChannelRealization r = sample_channel(s, pbf, rng);
  for (int k = 0; k < c.K(); ++k) {
    const CVector v = effective_phases(s, pbf, k);
    CVector in(c.N);
    for (int n = 0; n < c.N; ++n) in(n) = v(n) * std::polar(1.0, r.phase_err[k](n)) * r.g[k](n);
    for (int m = 0; m < c.M; ++m) EXPECT_LT((r.f(m, k) - r.d(m, k) - r.Q[m] * in).norm(), 1e-12 * r.f(m, k).norm());
  }
}

TEST(SampleChannel, InfiniteConcentrationMeansNoPhaseError) {
  SystemConfig c = desk_config();
  c.vartheta = std::numeric_limits<double>::infinity();
  const Scene s = make_scene(c);
  Rng rng(1);
  const ChannelRealization r = sample_channel(s, baseline_beamforming(c), rng);
  for (const auto& e : r.phase_err) EXPECT_EQ(e.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Beamforming, RandomRespectsCoupling) {
  Rng rng(4);
  const PassiveBeamforming p = random_beamforming(64, rng);
  for (int n = 0; n < 64; ++n) {
    EXPECT_DOUBLE_EQ(p.beta_T(n) + p.beta_R(n), 1.0);
    EXPECT_GE(p.beta_T(n), 0.0);
    EXPECT_LE(p.beta_T(n), 1.0);
    EXPECT_GE(p.theta_T(n), 0.0);
    EXPECT_LT(p.theta_T(n), 2 * std::numbers::pi);
    EXPECT_GE(p.theta_R(n), 0.0);
    EXPECT_LT(p.theta_R(n), 2 * std::numbers::pi);
  }
}

}  // namespace
}  // namespace starcf
