#include "blochtomo/pt_symmetry.hpp"

#include "blochtomo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blochtomo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZeroEntry = 1e-12;
// Rounding slack at the phi' = +-pi/2 fold so a purely imaginary pair lands on +pi/2.
constexpr double kFoldSlack = 1e-12;

}  // namespace

Mat2 rotation_r() {
    const double c = std::cos(kPi / 8.0);
    const double s = std::sin(kPi / 8.0);
    Mat2 r;
    r << c, kI * s, kI * s, c;
    return r;
}

Mat2 sublattice_operator() {
    const auto& p = pauli_matrices();
    return (p[1] - p[2]) / std::numbers::sqrt2;
}

RotatedForm rotate_hamiltonian(const Mat2& h) {
    const Mat2 r = rotation_r();
    RotatedForm rf;
    rf.h_r = r * h * r.adjoint();
    rf.z_a = rf.h_r(0, 1);
    rf.z_b = rf.h_r(1, 0);
    rf.diag_residual = std::max(std::abs(rf.h_r(0, 0)), std::abs(rf.h_r(1, 1)));
    rf.sublattice_violation = rf.diag_residual > kSublatticeWarnTolerance;
    return rf;
}

PTDecomposition pt_decompose(cplx z_a, cplx z_b) {
    PTDecomposition d;
    d.a = std::abs(z_a);
    d.b = std::abs(z_b);
    if (d.a < kZeroEntry && d.b < kZeroEntry) {
        throw Error(ErrorCode::ZeroMatrix, "pt_decompose: both off-diagonals vanish");
    }
    double arg_a = std::arg(z_a);
    double arg_b = std::arg(z_b);
    if (d.a < kZeroEntry || d.b < kZeroEntry) {
        // One-sided zero (EP): put all of the phase into phi.
        d.one_sided_zero = true;
        if (d.a < kZeroEntry) arg_a = -arg_b; else arg_b = -arg_a;
    }
    d.phi_prime = 0.5 * (arg_a + arg_b);
    d.phi = 0.5 * (arg_a - arg_b);
    if (d.phi_prime > kPi / 2.0 + kFoldSlack) {
        d.phi_prime -= kPi;
        d.phi -= kPi;
    } else if (d.phi_prime <= -kPi / 2.0 + kFoldSlack) {
        d.phi_prime += kPi;
        d.phi += kPi;
    }
    if (d.phi > kPi) d.phi -= 2.0 * kPi;
    if (d.phi <= -kPi) d.phi += 2.0 * kPi;
    return d;
}

Vec2 vk_apply(double phi, const Vec2& psi) {
    return Vec2(std::polar(1.0, phi) * std::conj(psi(0)), std::polar(1.0, -phi) * std::conj(psi(1)));
}

double order_parameter(const Vec2& psi, double phi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) {
        throw Error(ErrorCode::ZeroVector, "order_parameter: zero state");
    }
    const Vec2 unit = psi / norm;
    return std::clamp(1.0 - std::abs(unit.dot(vk_apply(phi, unit))), 0.0, 1.0);
}

const char* to_string(SpectrumPurity p) noexcept {
    switch (p) {
        case SpectrumPurity::RealPair: return "RealPair";
        case SpectrumPurity::ImaginaryPair: return "ImaginaryPair";
        case SpectrumPurity::Zero: return "Zero";
        case SpectrumPurity::Mixed: return "Mixed";
    }
    return "?";
}

const char* to_string(PTPhase p) noexcept {
    switch (p) {
        case PTPhase::Unbroken: return "Unbroken";
        case PTPhase::Broken: return "Broken";
        case PTPhase::ExceptionalPoint: return "ExceptionalPoint";
        case PTPhase::Undetermined: return "Undetermined";
    }
    return "?";
}

PTClassification classify_phase(const RotatedForm& rf, double tol) {
    PTClassification out;
    const cplx lambda = std::sqrt(rf.z_a * rf.z_b);
    out.lambda1 = lambda;
    out.lambda2 = -lambda;
    const double mag = std::abs(lambda);
    const double scale = std::max(std::abs(rf.z_a), std::abs(rf.z_b));
    if (scale < kZeroEntry) {
        out.purity = SpectrumPurity::Zero;
        return out;
    }
    if (mag <= std::max(tol * scale, 1e-12)) {
        out.purity = SpectrumPurity::Zero;
    } else if (std::abs(lambda.imag()) <= tol * mag) {
        out.purity = SpectrumPurity::RealPair;
    } else if (std::abs(lambda.real()) <= tol * mag) {
        out.purity = SpectrumPurity::ImaginaryPair;
    }
    switch (out.purity) {
        case SpectrumPurity::RealPair: out.phase = PTPhase::Unbroken; break;
        case SpectrumPurity::ImaginaryPair: out.phase = PTPhase::Broken; break;
        case SpectrumPurity::Zero: out.phase = PTPhase::ExceptionalPoint; break;
        case SpectrumPurity::Mixed: out.phase = PTPhase::Undetermined; break;
    }
    out.decomposition = pt_decompose(rf.z_a, rf.z_b);
    const Eigensystem es = eigensystem(rf.h_r);
    out.at_ep = out.purity == SpectrumPurity::Zero || es.coalesced;
    out.order_parameter = order_parameter(es.psi1, out.decomposition.vk_angle());
    return out;
}

Mat2 sublattice_hamiltonian(double a, double b, double phi) {
    Mat2 h = Mat2::Zero();
    h(0, 1) = a * std::polar(1.0, phi);
    h(1, 0) = b * std::polar(1.0, -phi);
    return h;
}

PTEquivalent pt_equivalent(double a, double b, double phi) {
    PTEquivalent out;
    out.h_pt << kI * (b - a), b + a, b + a, -kI * (b - a);
    out.h_pt *= 0.5;
    Mat2 u = Mat2::Zero();
    u(0, 0) = std::polar(1.0, phi / 2.0);
    u(1, 1) = std::polar(1.0, -phi / 2.0);
    out.r_phi = coin_matrix() * u.adjoint();
    return out;
}

}  // namespace blochtomo
