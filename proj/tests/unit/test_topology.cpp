#include "test_support.hpp"

#include <blochtomo/errors.hpp>
#include <blochtomo/polarimetry.hpp>
#include <blochtomo/topology.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace blochtomo;
using testsupport::as_complex;
using testsupport::oracles;

namespace {

cplx closed_form_winding(double d, double e, int n_q) {
    const ClosedFormBand band = closed_form_band(ModelParams(d, e), n_q);
    return winding_number(band.q, band.bloch_vectors());
}

}  // namespace

TEST(Winding, MatchesOracleAtPaperSettings) {
    for (const auto& w : oracles()["winding_90"]) {
        const cplx nu = closed_form_winding(w["delta"], w["eta"], 90);
        EXPECT_LT(std::abs(nu - as_complex(w["nu"])), 1e-10);
        EXPECT_LE(std::abs(nu.imag()), 0.02);
    }
}

TEST(Winding, PaperIntegers) {
    EXPECT_NEAR(closed_form_winding(std::numbers::pi / 4, 0.9, 90).real(), 0.0, 0.02);
    EXPECT_NEAR(closed_form_winding(1.3, 1.4, 90).real(), 1.0, 0.02);
    EXPECT_NEAR(closed_form_winding(std::numbers::pi, 0.25, 90).real(), 1.0, 0.02);
}

TEST(Winding, GridStableAwayFromBoundaries) {
    for (const auto& [d, e] : testsupport::paper_settings()) {
        const double coarse = closed_form_winding(d, e, 90).real();
        const double fine = closed_form_winding(d, e, 720).real();
        EXPECT_LE(std::abs(coarse - fine), 0.01) << d << ", " << e;
    }
}

TEST(Winding, InsensitiveToPerSampleSignFlips) {
    const ClosedFormBand band = closed_form_band(ModelParams(1.3, 1.4), 90);
    auto n = band.bloch_vectors();
    const cplx ref = winding_number(band.q, n);
    testsupport::Rng rng(21);
    for (auto& v : n) {
        if (rng.uniform(0.0, 1.0) < 0.5) v = -v;
    }
    EXPECT_LT(std::abs(winding_number(band.q, n) - ref), 1e-14);
    const auto aligned = align_bloch_vectors(n);
    for (std::size_t k = 1; k < aligned.size(); ++k) {
        EXPECT_LT((aligned[k] - aligned[k - 1]).norm(), (aligned[k] + aligned[k - 1]).norm());
    }
}

TEST(Winding, GridValidation) {
    const ClosedFormBand band = closed_form_band(ModelParams(1.3, 1.4), 6);
    EXPECT_THROW(winding_number(band.q, band.bloch_vectors()), Error);
    ClosedFormBand ok = closed_form_band(ModelParams(1.3, 1.4), 16);
    auto q = ok.q;
    q[3] += 0.01;
    try {
        winding_number(q, ok.bloch_vectors());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GridError);
    }
    // An offset grid is still uniform.
    for (auto& v : q) v = ok.q[&v - q.data()] + 0.05;
    EXPECT_NO_THROW(winding_number(q, ok.bloch_vectors()));
}

TEST(Sublattice, ResidualOfClosedFormAndConstructedViolation) {
    const ClosedFormBand band = closed_form_band(ModelParams(1.3, 0.6), 90);
    auto n = band.bloch_vectors();
    EXPECT_LE(sublattice_residual(n), 1e-12);
    const cplx ny = n[10](1);
    n[10](2) = -ny;
    EXPECT_NEAR(sublattice_residual(n), std::abs(2.0 * ny), 1e-15);
}

TEST(PhaseDiagram, HermitianAxisAndSymmetry) {
    const PhaseDiagram pd = phase_diagram({0.2, 2.0 * std::numbers::pi - 0.2}, {0.0, 1.2}, 9, 90);
    ASSERT_EQ(pd.nu.size(), 81u);
    for (std::size_t i = 0; i < 9; ++i) {
        for (std::size_t j = 0; j < 9; ++j) {
            const double a = pd.at(i, j);
            const double b = pd.at(8 - i, j);
            if (std::isnan(a) || std::isnan(b)) continue;
            EXPECT_NEAR(a, b, 1e-9);
            EXPECT_NEAR(pd.nu_imag_residual[i * 9 + j], -pd.nu_imag_residual[(8 - i) * 9 + j], 1e-9);
        }
    }
    const PhaseDiagram axis = phase_diagram({std::numbers::pi / 4, std::numbers::pi}, {0.0, 0.0}, 8, 90);
    EXPECT_NEAR(axis.at(0, 0), 0.0, 0.02);
    EXPECT_NEAR(axis.at(7, 0), 1.0, 0.02);
    EXPECT_THROW(phase_diagram({0.0, 1.0}, {0.0, 1.0}, 7, 90), Error);
}

TEST(PhaseDiagram, TransitionNearEtaPointNineNine) {
    const PhaseDiagram pd = phase_diagram({1.3, 1.3}, {0.98, 1.00}, 8, 720);
    EXPECT_EQ(std::lround(pd.at(0, 0)), 0);
    EXPECT_EQ(std::lround(pd.at(0, 7)), 1);
}

TEST(ExceptionalPoints, PhaseBoundaryAtDeltaOnePointThree) {
    const auto& ep = oracles()["ep"];
    const auto records = find_exceptional_points(1.3);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_NEAR(records[0].eta_c, 0.99, 0.01);
    EXPECT_NEAR(records[0].eta_c, ep["eta_c"].get<double>(), 1e-9);
    EXPECT_NEAR(records[0].q_c, ep["q_c"].get<double>(), 1e-9);
    EXPECT_NEAR(records[1].q_c, ep["q_c_mirror"].get<double>(), 1e-9);
    EXPECT_NEAR(records[0].q_c + records[1].q_c, kTwoPi, 1e-12);
    for (const auto& r : records) {
        EXPECT_LE(r.residual, 1e-9);
        const auto cs = canonical_from_operator(step_operator(ModelParams(1.3, r.eta_c), Quasimomentum(r.q_c)));
        const Eigensystem es = eigensystem(cs);
        EXPECT_TRUE(es.coalesced);
        EXPECT_LE(1.0 - state_fidelity(es.psi1, es.psi2), 1e-6);
    }
    EXPECT_NE(records[0].branch, records[1].branch);
}

TEST(ExceptionalPoints, NewtonFromNearbyGuess) {
    const auto records = find_exceptional_points(1.3, 2.3, 1.1);
    EXPECT_NEAR(records[0].eta_c, oracles()["ep"]["eta_c"].get<double>(), 1e-9);
}

TEST(ExceptionalPoints, HermitianBandTouchingIsNotAnEP) {
    try {
        find_exceptional_points(std::numbers::pi / 2, std::numbers::pi, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotAnEP);
    }
}

TEST(CriticalMomentum, InfidelityMinimaOnGrid) {
    for (const auto& rec : oracles()["infidelity"]) {
        const ClosedFormBand band = closed_form_band(ModelParams(rec["delta"], rec["eta"]), 90);
        const auto profile = infidelity_profile(band.steps);
        EXPECT_NEAR(*std::min_element(profile.begin(), profile.end()), rec["min"].get<double>(), 1e-9);
        if (rec["max"].get<double>() - rec["min"].get<double>() > 0.1) {
            std::vector<std::size_t> expected;
            for (const auto& k : rec["minima"]) expected.push_back(k.get<std::size_t>());
            EXPECT_EQ(local_minima(profile), expected);
        }
    }
    const CriticalMomentum cm = critical_momentum(1.3, 1.4, 90);
    EXPECT_EQ(cm.k_first, 32u);
    EXPECT_EQ(cm.k_second, 58u);
    EXPECT_FALSE(cm.shallow);
    EXPECT_LE(std::abs(cm.q_first + cm.q_second - kTwoPi), kTwoPi / 90 + 1e-12);
}

TEST(CriticalMomentum, ShallowProfileFlagged) {
    const CriticalMomentum cm = critical_momentum(std::numbers::pi, 0.25, 90);
    EXPECT_TRUE(cm.shallow);
    EXPECT_GT(cm.min_infidelity, 0.99);
    EXPECT_THROW(critical_momentum(1.3, 1.4, 4), Error);
}

TEST(HarmonicBand, ExactForNoiselessSteps) {
    const ModelParams p(1.3, 0.6);
    const ClosedFormBand band = closed_form_band(p, 90);
    const HarmonicBand fit = HarmonicBand::fit(band.q, band.steps);
    EXPECT_LT(fit.fit_residual(), 1e-14);
    for (double q : {0.123, 2.5, 4.9}) {
        const Mat2 ref = step_operator(p, Quasimomentum(q));
        EXPECT_LT(testsupport::sign_blind_distance(fit.at(q).matrix(), ref), 1e-13);
    }
    const auto momenta = fit.pure_spectrum_momenta();
    ASSERT_TRUE(momenta);
    EXPECT_NEAR(momenta->first, oracles()["ep"]["q_c"].get<double>(), 1e-10);
    EXPECT_NEAR(momenta->second, oracles()["ep"]["q_c_mirror"].get<double>(), 1e-10);
}

TEST(HarmonicBand, HermitianBandHasNoDistinguishedMomentum) {
    const ClosedFormBand band = closed_form_band(ModelParams(1.3, 0.0), 30);
    EXPECT_FALSE(HarmonicBand::fit(band.q, band.steps).pure_spectrum_momenta());
}
