#include "test_support.hpp"

#include <blochtomo/errors.hpp>
#include <blochtomo/spectral.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace blochtomo;
using testsupport::as_complex;
using testsupport::as_matrix;
using testsupport::oracles;

namespace {

const double kDeltaEp = 1.3;
double eta_c() { return oracles()["ep"]["eta_c"].get<double>(); }
double q_c() { return oracles()["ep"]["q_c"].get<double>(); }

}  // namespace

TEST(Spectral, StepOperatorMatchesOracleMatrices) {
    for (const auto& s : oracles()["samples"]) {
        const ModelParams p(s["delta"], s["eta"]);
        const Mat2 u = step_operator(p, Quasimomentum(s["q"].get<double>()));
        EXPECT_LT((u - as_matrix(s["u"])).norm(), 1e-13);
        EXPECT_LT(std::abs(u.determinant() - 1.0), 1e-13);
    }
}

TEST(Spectral, ClosedFormMatchesOracle) {
    for (const auto& s : oracles()["samples"]) {
        const auto c = hopping_from_params(ModelParams(s["delta"], s["eta"]));
        const auto b = bloch_closed_form(c, Quasimomentum(s["q"].get<double>()));
        EXPECT_LT(std::abs(b.energy - as_complex(s["energy"])), 1e-12);
        for (int l = 0; l < 3; ++l) EXPECT_LT(std::abs(b.n(l) - as_complex(s["n"][l])), 1e-12);
        EXPECT_LT(std::abs(b.norm_residual()), 1e-12);
        EXPECT_LT(b.sublattice_residual(), 1e-15);
    }
}

TEST(Spectral, CanonicalChartAgreesWithClosedForm) {
    for (const auto& s : oracles()["samples"]) {
        const ModelParams p(s["delta"], s["eta"]);
        const Quasimomentum q(s["q"].get<double>());
        const auto cs = canonical_from_operator(step_operator(p, q));
        EXPECT_LT(std::abs(cs.gauge_residual()), 1e-13);
        const auto b = bloch_from_canonical(cs);
        const auto ref = bloch_closed_form(hopping_from_params(p), q);
        EXPECT_LT(std::abs(b.energy - ref.energy), 1e-10);
        EXPECT_LT((b.n - ref.n).norm(), 1e-10);
        EXPECT_LT((canonical_from_bloch(b).matrix() - cs.matrix()).norm(), 1e-12);
    }
}

TEST(Spectral, EffectiveHamiltonianExponentiatesBack) {
    for (const auto& s : oracles()["samples"]) {
        const ModelParams p(s["delta"], s["eta"]);
        const Mat2 u = step_operator(p, Quasimomentum(s["q"].get<double>()));
        const Mat2 h = effective_hamiltonian(canonical_from_operator(u));
        const Mat2 back = (Mat2(-kI * h)).exp();
        EXPECT_LT((back - u).norm(), 1e-12);
    }
}

TEST(Spectral, EigenvaluesMatchMatrixLogarithm) {
    for (const auto& s : oracles()["samples"]) {
        const ModelParams p(s["delta"], s["eta"]);
        const auto cs = canonical_from_operator(step_operator(p, Quasimomentum(s["q"].get<double>())));
        const Eigensystem es = eigensystem(cs);
        EXPECT_LT(std::abs(es.lambda1 + es.lambda2), 1e-15);
        const cplx o1 = as_complex(s["heff_eigs"][0]);
        const cplx o2 = as_complex(s["heff_eigs"][1]);
        const double direct = std::abs(es.lambda1 - o1) + std::abs(es.lambda2 - o2);
        const double swapped = std::abs(es.lambda1 - o2) + std::abs(es.lambda2 - o1);
        EXPECT_LT(std::min(direct, swapped), 1e-8);
        const Mat2 h = effective_hamiltonian(cs);
        EXPECT_LT((h * es.psi1 - es.lambda1 * es.psi1).norm(), 1e-10);
        EXPECT_LT((h * es.psi2 - es.lambda2 * es.psi2).norm(), 1e-10);
    }
}

TEST(Spectral, ExceptionalPointIsJordanBlock) {
    const ModelParams p(kDeltaEp, eta_c());
    const Quasimomentum q(q_c());
    EXPECT_THROW(
        {
            try {
                bloch_closed_form(hopping_from_params(p), q);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::EPSingular);
                throw;
            }
        },
        Error);
    const auto cs = canonical_from_operator(step_operator(p, q));
    const Mat2 h = effective_hamiltonian(cs);
    EXPECT_TRUE(h.allFinite());
    EXPECT_GT(h.norm(), 0.1);
    EXPECT_LT((h * h).norm(), 1e-6);
    EXPECT_TRUE(eigensystem(cs).coalesced);
}

TEST(Spectral, GenericPointIsNotCoalesced) {
    const auto cs = canonical_from_operator(step_operator(ModelParams(1.3, 1.4), Quasimomentum(0.3)));
    EXPECT_FALSE(eigensystem(cs).coalesced);
}

TEST(Spectral, ScalarOperatorHasNoBlochVector) {
    try {
        bloch_from_canonical(CanonicalStep{});
        FAIL() << "identity should not have a Bloch vector";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ScalarOperator);
    }
}

TEST(Spectral, JordanBlockAtPiIsSingular) {
    CanonicalStep cs;
    cs.m0 = -1.0;
    cs.m = Vec3(1.0, kI, 0.0);  // m.m = 0
    try {
        effective_hamiltonian(cs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EPSingular);
    }
}

TEST(Spectral, CanonicalizeRemovesScale) {
    const Mat2 u = step_operator(ModelParams(1.3, 0.6), Quasimomentum(1.0));
    const cplx c(0.3, -2.0);
    const Canonicalization canon = canonicalize(c * u);
    EXPECT_LT(std::abs(canon.step.gauge_residual()), 1e-13);
    EXPECT_LT((canon.step.matrix() - canon.scale * c * u).norm(), 1e-13);
    EXPECT_LT(testsupport::sign_blind_distance(canon.step.matrix(), u), 1e-13);
}

TEST(Spectral, DegenerateOperatorRejected) {
    Mat2 u;
    u << 1.0, 2.0, 2.0, 4.0;
    try {
        canonicalize(u);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateOperator);
    }
}

TEST(Spectral, HermitianLimitAtZeroEta) {
    for (double q : {0.0, 0.4, 2.0, 5.5}) {
        const Mat2 u = step_operator(ModelParams(1.1, 0.0), Quasimomentum(q));
        EXPECT_LT((u.adjoint() * u - Mat2::Identity()).norm(), 1e-14);
        const Mat2 h = effective_hamiltonian(canonical_from_operator(u));
        EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
        EXPECT_LT(hermitian_split(h).anti.norm(), 1e-12);
    }
}

TEST(Spectral, ModelParamsValidation) {
    EXPECT_THROW(ModelParams(std::nan(""), 0.0), Error);
    EXPECT_THROW(ModelParams(0.0, INFINITY), Error);
    EXPECT_NEAR(ModelParams(-1.0, 0.0).delta(), kTwoPi - 1.0, 1e-15);
    EXPECT_NEAR(Quasimomentum(kTwoPi + 0.5).value(), 0.5, 1e-15);
}

TEST(Spectral, FidelitiesAndStokes) {
    EXPECT_THROW(state_fidelity(Vec2::Zero(), Vec2(1.0, 0.0)), Error);
    EXPECT_THROW(operator_fidelity(Mat2::Zero(), Mat2::Identity()), Error);
    EXPECT_NEAR(state_fidelity(Vec2(1.0, 0.0), Vec2(kI, 0.0)), 1.0, 1e-15);
    EXPECT_NEAR(state_fidelity(Vec2(1.0, 0.0), Vec2(0.0, 1.0)), 0.0, 1e-15);
    EXPECT_NEAR(operator_fidelity(Mat2::Identity(), -2.0 * kI * Mat2::Identity()), 1.0, 1e-15);
    const Eigen::Vector3d sl = stokes(Vec2(1.0, 0.0));
    EXPECT_NEAR(sl(2), 1.0, 1e-15);
    const Eigen::Vector3d sh = stokes(Vec2(1.0, 1.0));
    EXPECT_NEAR(sh(0), 1.0, 1e-15);
    EXPECT_THROW(stokes(Vec2::Zero()), Error);
}

TEST(Spectral, PhaseGaugeFixesFirstComponent) {
    const Vec2 v(cplx(0.0, -0.6), cplx(0.8, 0.0));
    const Vec2 g = fix_phase_gauge(v);
    EXPECT_NEAR(g(0).imag(), 0.0, 1e-15);
    EXPECT_GT(g(0).real(), 0.0);
    EXPECT_NEAR(std::abs(g.dot(v)), 1.0, 1e-15);
    const Vec2 w = fix_phase_gauge(Vec2(0.0, cplx(0.0, 1.0)));
    EXPECT_NEAR(w(1).real(), 1.0, 1e-15);
}
