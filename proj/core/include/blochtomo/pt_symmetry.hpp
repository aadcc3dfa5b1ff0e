// pt_symmetry.hpp — rotated sublattice frame, VK symmetry and PT classification
//
// In the frame rotated by r = sqrt(W) the sublattice operator becomes
// diagonal and a sublattice-symmetric H_eff is purely off-diagonal,
//
//     H_r = [[0, z_a], [z_b, 0]] = e^{i phi'} [[0, a e^{i phi}], [b e^{-i phi}, 0]].
//
// The antiunitary VK with V = diag(e^{i phi}, e^{-i phi}) commutes with the
// bracketed matrix; its action on the eigenvectors decides whether the
// symmetry is spontaneously broken.

#pragma once

#include "blochtomo/spectral.hpp"

#include <utility>

namespace blochtomo {

/// Principal square root of the coin: cos(pi/8) s0 + i sin(pi/8) sigma_x.
Mat2 rotation_r();

/// Sublattice operator S = (sigma_y - sigma_z) / sqrt 2.
Mat2 sublattice_operator();

/// r S r^dagger = kRotatedSublatticeSign * sigma_z.
inline constexpr double kRotatedSublatticeSign = -1.0;

/// Diagonal entries above this mark a sublattice violation.
inline constexpr double kSublatticeWarnTolerance = 1e-6;

struct RotatedForm {
    Mat2 h_r;
    cplx z_a;
    cplx z_b;
    double diag_residual = 0.0;
    bool sublattice_violation = false;  // warning, not an error
};

RotatedForm rotate_hamiltonian(const Mat2& h);

struct PTDecomposition {
    double phi = 0.0;        // (-pi, pi]
    double phi_prime = 0.0;  // (-pi/2, pi/2], with 1e-12 slack at the upper end
    double a = 0.0;
    double b = 0.0;
    bool one_sided_zero = false;

    /// Angle of the V that commutes with H_r itself: arg z_a mod pi.
    double vk_angle() const { return phi + phi_prime; }
};

/// Normal form with a, b >= 0.  Throws ZeroMatrix when both entries vanish.
PTDecomposition pt_decompose(cplx z_a, cplx z_b);

/// V conj(psi), V = cos(phi) s0 + i sin(phi) sigma_z.
Vec2 vk_apply(double phi, const Vec2& psi);

/// 1 - |<psi| V conj(psi)>| on the normalized state.  Throws ZeroVector.
double order_parameter(const Vec2& psi, double phi);

enum class SpectrumPurity { RealPair, ImaginaryPair, Zero, Mixed };
enum class PTPhase { Unbroken, Broken, ExceptionalPoint, Undetermined };

const char* to_string(SpectrumPurity p) noexcept;
const char* to_string(PTPhase p) noexcept;

struct PTClassification {
    PTPhase phase = PTPhase::Undetermined;
    SpectrumPurity purity = SpectrumPurity::Mixed;
    double order_parameter = 0.0;
    cplx lambda1;
    cplx lambda2;
    PTDecomposition decomposition;
    bool at_ep = false;  // order parameter taken on the single surviving eigenvector
};

/// Eigenvalues +-sqrt(z_a z_b).  Zero when |lambda| <= tol * max|z| (floor
/// 1e-12); otherwise RealPair / ImaginaryPair when the other part is within
/// tol * |lambda|.
PTClassification classify_phase(const RotatedForm& rf, double tol = 1e-6);

/// [[0, a e^{i phi}], [b e^{-i phi}, 0]].
Mat2 sublattice_hamiltonian(double a, double b, double phi);

struct PTEquivalent {
    Mat2 h_pt;   // (1/2) [[i(b-a), b+a], [b+a, -i(b-a)]]
    Mat2 r_phi;  // W U_phi^dagger, U_phi = diag(e^{i phi/2}, e^{-i phi/2})
};

PTEquivalent pt_equivalent(double a, double b, double phi);

}  // namespace blochtomo
