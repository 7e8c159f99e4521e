#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lqioc/identifiability.hpp"

using namespace lqioc;
using fixtures::vec2;

namespace {

Certificate example_certificate(double alpha) {
  Matrix dq(2, 2);
  dq << alpha, alpha, alpha, 0.0;
  return {SymMatrix::diagonal(vec2(0.0, -alpha)), SymMatrix(dq), alpha};
}

void expect_consequences(const Certificate& c, const SystemDynamics& sd, const SymMatrix& q_bar) {
  const auto fwd = solve_dare(sd, q_bar);
  ASSERT_TRUE(verify_certificate(c, sd, fwd.p, q_bar, 1e-8));
  EXPECT_LE((control_gain(fwd.p + c.delta_p, sd) - fwd.k).norm(), 1e-10);
  EXPECT_LE(dare_residual(sd, q_bar + c.delta_q, fwd.p + c.delta_p), 1e-8);
  for (double s : {0.25, 0.5, 1.0}) {
    const Certificate scaled{s * c.delta_p, s * c.delta_q, s * c.alpha};
    EXPECT_TRUE(verify_certificate(scaled, sd, fwd.p, q_bar, 1e-8)) << "scale " << s;
  }
}

}  // namespace

TEST(VerifyCertificate, ExampleConstruction) {
  const auto sd = fixtures::example_system();
  const auto fwd = solve_dare(sd, fixtures::example_q());
  EXPECT_TRUE(verify_certificate(example_certificate(0.5), sd, fwd.p, fixtures::example_q(), 1e-8));

  const Certificate zero{SymMatrix::zero(2), SymMatrix::zero(2), 0.0};
  EXPECT_FALSE(verify_certificate(zero, sd, fwd.p, fixtures::example_q(), 1e-8));

  const SymMatrix dp = SymMatrix::identity(2);
  const Certificate bad{dp, partner_delta_q(sd, dp), 1.0};
  EXPECT_FALSE(verify_certificate(bad, sd, fwd.p, fixtures::example_q(), 1e-8));
}

TEST(VerifyCertificate, TooLargeStepBreaksDefiniteness) {
  const auto sd = fixtures::example_system();
  const auto fwd = solve_dare(sd, fixtures::example_q());
  // Q̄ + ΔQ = [[α, α], [α, 1]] stops being PSD once α > 1.
  EXPECT_FALSE(verify_certificate(example_certificate(1.5), sd, fwd.p, fixtures::example_q(), 1e-8));
}

TEST(PartnerDeltaQ, SatisfiesLyapunovCondition) {
  const auto sd = fixtures::example_system();
  const SymMatrix dp = SymMatrix::diagonal(vec2(0.0, -0.5));
  const SymMatrix dq = partner_delta_q(sd, dp);
  const Certificate expected = example_certificate(0.5);
  EXPECT_NEAR((dq - expected.delta_q).norm(), 0.0, 1e-15);
}

TEST(AdmissibleBasis, SpansKernelOfBTranspose) {
  std::mt19937_64 rng(21);
  for (auto [n, m] : {std::pair{2, 1}, {3, 1}, {4, 2}, {5, 2}}) {
    const SystemDynamics sd(fixtures::random_matrix(n, n, rng), fixtures::random_matrix(n, m, rng));
    const auto basis = admissible_delta_p_basis(sd);
    const int k = n - m;
    EXPECT_EQ(static_cast<int>(basis.size()), k * (k + 1) / 2);
    Matrix stacked(n * n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      EXPECT_LE((sd.b().transpose() * basis[i].matrix()).norm(), 1e-12);
      EXPECT_NEAR(basis[i].norm(), 1.0, 1e-12);
      stacked.col(static_cast<Eigen::Index>(i)) = basis[i].matrix().reshaped();
    }
    EXPECT_EQ(numerical_rank(stacked), static_cast<Eigen::Index>(basis.size()));
  }
}

TEST(KernelCertificate, ExampleHasTheClosedForm) {
  const auto sd = fixtures::example_system();
  const auto fwd = solve_dare(sd, fixtures::example_q());
  const auto c = kernel_certificate(sd, fwd.p, fixtures::example_q());
  // Q̄ = diag(0, 1) is singular, so the kernel direction may not be feasible;
  // whenever a certificate is returned it must have the closed form.
  if (c) {
    EXPECT_NEAR(c->delta_p(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(c->delta_p(0, 1), 0.0, 1e-12);
    const Certificate expected = example_certificate(-c->delta_p(1, 1));
    EXPECT_NEAR((c->delta_q - expected.delta_q).norm(), 0.0, 1e-10);
    expect_consequences(*c, sd, fixtures::example_q());
  }
}

TEST(KernelCertificate, CrankWithIdentityCost) {
  const auto sd = fixtures::crank_system();
  const SymMatrix q = SymMatrix::identity(2);
  const auto fwd = solve_dare(sd, q);
  const auto c = kernel_certificate(sd, fwd.p, q);
  ASSERT_TRUE(c.has_value());
  expect_consequences(*c, sd, q);
}

TEST(KernelCertificate, NotApplicableWhenSquare) {
  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  const SystemDynamics sd(a, Matrix::Identity(2, 2));
  const auto fwd = solve_dare(sd, SymMatrix::identity(2));
  EXPECT_THROW(kernel_certificate(sd, fwd.p, SymMatrix::identity(2)), NotApplicableError);
}

TEST(KernelCertificate, SucceedsForEveryPositiveDefiniteCost) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const Eigen::Index m = 1 + (trial % 2) * (n > 2 ? 1 : 0);
    const SystemDynamics sd(fixtures::random_matrix(n, n, rng), fixtures::random_matrix(n, m, rng));
    SymMatrix q = fixtures::random_psd(n, rng) + 0.1 * SymMatrix::identity(n);
    const auto fwd = solve_dare(sd, q);
    const auto c = kernel_certificate(sd, fwd.p, q);
    ASSERT_TRUE(c.has_value()) << "trial " << trial;
    expect_consequences(*c, sd, q);
  }
}

TEST(CheckIdentifiability, Verdicts) {
  const auto ex = check_identifiability(fixtures::example_system(), fixtures::example_q());
  EXPECT_EQ(ex.status, IdentifiabilityStatus::NonIdentifiable);
  ASSERT_TRUE(ex.certificate.has_value());
  expect_consequences(*ex.certificate, fixtures::example_system(), fixtures::example_q());
  // Single admissible direction e₂e₂ᵀ: the certificate is the closed form.
  EXPECT_NEAR(ex.certificate->delta_p(1, 1), -0.5, 1e-9);
  EXPECT_NEAR((ex.certificate->delta_q - example_certificate(0.5).delta_q).norm(), 0.0, 1e-9);

  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  const auto square = check_identifiability(SystemDynamics(a, Matrix::Identity(2, 2)), SymMatrix::identity(2));
  EXPECT_EQ(square.status, IdentifiabilityStatus::Identifiable);
  EXPECT_FALSE(square.certificate.has_value());

  const auto crank = check_identifiability(fixtures::crank_system(), SymMatrix::identity(2));
  EXPECT_EQ(crank.status, IdentifiabilityStatus::NonIdentifiable);
  ASSERT_TRUE(crank.certificate.has_value());
  expect_consequences(*crank.certificate, fixtures::crank_system(), SymMatrix::identity(2));
}

TEST(CheckIdentifiability, SingularCostProbesAllDirections) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemDynamics sd(fixtures::random_matrix(3, 3, rng), fixtures::random_matrix(3, 1, rng));
    const SymMatrix q = fixtures::random_psd(3, rng, 2);
    LqrSolution fwd;
    try {
      fwd = solve_dare(sd, q);
    } catch (const ModelError&) {
      continue;
    }
    const auto v = check_identifiability(sd, q);
    EXPECT_NE(v.status, IdentifiabilityStatus::Identifiable);
    if (v.status == IdentifiabilityStatus::NonIdentifiable) {
      ASSERT_TRUE(v.certificate.has_value());
      expect_consequences(*v.certificate, sd, q);
    }
  }
}
