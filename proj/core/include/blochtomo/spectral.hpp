// spectral.hpp — exact forward model of one non-Hermitian quantum-walk step
//
// Parameters (delta, eta) map to complex hopping coefficients, which build the
// momentum-space step operator U(q) = T(q) W.  The operator is carried
// internally as a determinant-normalized Pauli decomposition
//
//     U = m0 * s0 + m . sigma,        m0^2 - m.m = 1,
//
// which stays finite at exceptional points.  The (E, n) chart of
// U = cos E s0 - i sin E n.sigma is derived from it and may legitimately fail
// where sin E = 0.
//
// Basis order is (|A>, |B>) everywhere, identified with (|L>, |R>) circular
// polarization.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <numbers>

namespace blochtomo {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3cd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Closed-form denominator and sin E below this are treated as an EP.
inline constexpr double kChartTolerance = 1e-10;
/// Eigenvector overlap |<psi1|psi2>|^2 above 1 - this flags coalescence.
inline constexpr double kDefaultEpTolerance = 1e-8;

/// Reduces an angle into [0, 2*pi).
double wrap_angle(double radians) noexcept;

/// Control pair of one walk configuration.  delta is reduced mod 2*pi.
class ModelParams {
public:
    ModelParams(double delta, double eta);

    double delta() const noexcept { return delta_; }
    double eta() const noexcept { return eta_; }

private:
    double delta_;
    double eta_;
};

/// Quasi-momentum in [0, 2*pi).
class Quasimomentum {
public:
    explicit Quasimomentum(double q);

    double value() const noexcept { return q_; }
    operator double() const noexcept { return q_; }

private:
    double q_;
};

struct HoppingCoeffs {
    cplx alpha;
    cplx beta;

    /// alpha^2 + beta^2 - 1 (complex bilinear); zero for model coefficients.
    cplx unit_residual() const noexcept { return alpha * alpha + beta * beta - 1.0; }
};

struct CanonicalStep {
    cplx m0{1.0, 0.0};
    Vec3 m{Vec3::Zero()};

    Mat2 matrix() const;
    /// m0^2 - m.m - 1, zero in the det = 1 gauge.
    cplx gauge_residual() const;
    CanonicalStep negated() const { return {-m0, -m}; }
};

struct BlochDecomposition {
    cplx energy;
    Vec3 n;

    /// n.n - 1 (complex bilinear).
    cplx norm_residual() const;
    double sublattice_residual() const { return std::abs(n(1) - n(2)); }
};

struct Eigensystem {
    cplx lambda1;
    cplx lambda2;
    Vec2 psi1;
    Vec2 psi2;
    bool coalesced = false;
};

struct HermitianSplit {
    Mat2 hermitian;      // (h + h^dagger) / 2
    Mat2 anti;           // (h - h^dagger) / (2i), Hermitian
    double commutator_norm = 0.0;
};

/// sigma_x, sigma_y, sigma_z.
const std::array<Mat2, 3>& pauli_matrices();

/// v_x sigma_x + v_y sigma_y + v_z sigma_z for a complex 3-vector.
Mat2 pauli_combination(const Vec3& v);

/// Complex bilinear dot product (no conjugation).
cplx bilinear_dot(const Vec3& a, const Vec3& b);

HoppingCoeffs hopping_from_params(const ModelParams& p);

/// Coin rotation W = (s0 + i sigma_x) / sqrt 2.
Mat2 coin_matrix();

/// Momentum-space translation T(q) = alpha s0 + i beta (e^{iq}|A><B| + e^{-iq}|B><A|).
/// The same beta multiplies both off-diagonals: hoppings are reciprocal but
/// not complex conjugate.
Mat2 translation_symbol(const HoppingCoeffs& c, Quasimomentum q);

/// U(q) = T(q) W.  det U = 1.
Mat2 step_operator(const HoppingCoeffs& c, Quasimomentum q);
Mat2 step_operator(const ModelParams& p, Quasimomentum q);

/// Closed-form (E, n) from the hopping coefficients, principal branches.
/// Throws EPSingular when 2 - (alpha - beta cos q)^2 vanishes.
BlochDecomposition bloch_closed_form(const HoppingCoeffs& c, Quasimomentum q);

/// Result of gauge-normalizing an arbitrary invertible 2x2 operator.
struct Canonicalization {
    CanonicalStep step;
    cplx scale{1.0, 0.0};  // step.matrix() == scale * u
};

/// Pauli traces of u after rescaling by 1/sqrt(det u) when det u != 1.
/// Throws DegenerateOperator when det u = 0.
Canonicalization canonicalize(const Mat2& u);
CanonicalStep canonical_from_operator(const Mat2& u);

/// Inverse exponential map: E = arccos m0, n = i m / sin E.
/// Throws EPSingular at a Jordan point, ScalarOperator when m = 0 and sin E = 0.
BlochDecomposition bloch_from_canonical(const CanonicalStep& cs);

/// m0 = cos E, m = -i sin E n.
CanonicalStep canonical_from_bloch(const BlochDecomposition& b);

/// H_eff = E n.sigma = (E / sin E) i m.sigma, finite at the E = 0 exceptional
/// point.  Throws EPSingular / ScalarOperator when E -> pi.
Mat2 effective_hamiltonian(const CanonicalStep& cs);

HermitianSplit hermitian_split(const Mat2& h);

/// Right eigensystem of a general 2x2 matrix.  Eigenvectors are unit
/// normalized with the first non-negligible component real and non-negative.
Eigensystem eigensystem(const Mat2& h, double ep_tolerance = kDefaultEpTolerance);

/// Right eigensystem of H_eff with lambda1 = E, lambda2 = -E.
Eigensystem eigensystem(const CanonicalStep& cs, double ep_tolerance = kDefaultEpTolerance);

/// Multiplies by a phase so the first non-negligible component is real >= 0.
Vec2 fix_phase_gauge(const Vec2& v);

/// |<psi1|psi2>|^2 on normalized inputs.  Throws ZeroVector.
double state_fidelity(const Vec2& psi1, const Vec2& psi2);

/// |Tr(a^dagger b)| / sqrt(Tr(a^dagger a) Tr(b^dagger b)).  Throws ZeroOperator.
double operator_fidelity(const Mat2& a, const Mat2& b);

/// S_k = <psi|sigma_k|psi> / <psi|psi>.  Throws ZeroVector.
Eigen::Vector3d stokes(const Vec2& psi);

}  // namespace blochtomo
