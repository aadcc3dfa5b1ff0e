#include "blochtomo/spectral.hpp"

#include "blochtomo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace blochtomo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Phase-gauge threshold for "first nonzero component".
constexpr double kGaugeFloor = 1e-14;

double frobenius2(const Mat2& a) { return a.squaredNorm(); }

// sqrt(1 - z^2) without cancellation near z = +-1.
cplx sqrt_one_minus_square(cplx z) {
    return std::sqrt((1.0 - z) * (1.0 + z));
}

// Eigenvector of the traceless matrix k for eigenvalue s; picks the better
// conditioned of the two adjugate columns.
std::optional<Vec2> traceless_eigenvector(const Mat2& k, cplx s, double scale) {
    Vec2 va(k(0, 1), s - k(0, 0));
    Vec2 vb(s + k(0, 0), k(1, 0));
    const double na = va.norm();
    const double nb = vb.norm();
    if (std::max(na, nb) <= 1e-14 * std::max(scale, 1e-300)) {
        return std::nullopt;
    }
    return na >= nb ? Vec2(va / na) : Vec2(vb / nb);
}

Eigensystem eigensystem_from_traceless(const Mat2& k, cplx shift, cplx s, double ep_tolerance) {
    Eigensystem out;
    out.lambda1 = shift + s;
    out.lambda2 = shift - s;
    const double scale = std::sqrt(frobenius2(k));
    if (scale <= 1e-300) {
        // Scalar matrix: every vector is an eigenvector.
        out.psi1 = Vec2(1.0, 0.0);
        out.psi2 = Vec2(0.0, 1.0);
        out.coalesced = false;
        return out;
    }
    auto v1 = traceless_eigenvector(k, s, scale);
    auto v2 = traceless_eigenvector(k, -s, scale);
    if (!v1 && !v2) {
        v1 = Vec2(1.0, 0.0);
        v2 = Vec2(0.0, 1.0);
    }
    out.psi1 = fix_phase_gauge(v1 ? *v1 : *v2);
    out.psi2 = fix_phase_gauge(v2 ? *v2 : *v1);
    const double overlap = std::norm(out.psi1.dot(out.psi2));
    out.coalesced = overlap > 1.0 - ep_tolerance;
    return out;
}

}  // namespace

double wrap_angle(double radians) noexcept {
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

ModelParams::ModelParams(double delta, double eta) {
    if (!std::isfinite(delta) || !std::isfinite(eta)) {
        throw Error(ErrorCode::ConfigError, "ModelParams: delta and eta must be finite");
    }
    delta_ = wrap_angle(delta);
    eta_ = eta;
}

Quasimomentum::Quasimomentum(double q) {
    if (!std::isfinite(q)) {
        throw Error(ErrorCode::GridError, "Quasimomentum: q must be finite");
    }
    q_ = wrap_angle(q);
}

Mat2 CanonicalStep::matrix() const {
    return m0 * Mat2::Identity() + pauli_combination(m);
}

cplx CanonicalStep::gauge_residual() const {
    return m0 * m0 - bilinear_dot(m, m) - 1.0;
}

cplx BlochDecomposition::norm_residual() const {
    return bilinear_dot(n, n) - 1.0;
}

const std::array<Mat2, 3>& pauli_matrices() {
    static const std::array<Mat2, 3> paulis = [] {
        Mat2 sx, sy, sz;
        sx << 0.0, 1.0, 1.0, 0.0;
        sy << 0.0, -kI, kI, 0.0;
        sz << 1.0, 0.0, 0.0, -1.0;
        return std::array<Mat2, 3>{sx, sy, sz};
    }();
    return paulis;
}

Mat2 pauli_combination(const Vec3& v) {
    Mat2 out;
    out << v(2), v(0) - kI * v(1), v(0) + kI * v(1), -v(2);
    return out;
}

cplx bilinear_dot(const Vec3& a, const Vec3& b) {
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

HoppingCoeffs hopping_from_params(const ModelParams& p) {
    const cplx half_angle = 0.5 * cplx(p.delta(), p.eta());
    return {std::cos(half_angle), std::sin(half_angle)};
}

Mat2 coin_matrix() {
    Mat2 w;
    w << kInvSqrt2, kI * kInvSqrt2, kI * kInvSqrt2, kInvSqrt2;
    return w;
}

Mat2 translation_symbol(const HoppingCoeffs& c, Quasimomentum q) {
    const cplx forward = std::exp(kI * q.value());
    Mat2 t;
    t << c.alpha, kI * c.beta * forward, kI * c.beta * std::conj(forward), c.alpha;
    return t;
}

Mat2 step_operator(const HoppingCoeffs& c, Quasimomentum q) {
    return translation_symbol(c, q) * coin_matrix();
}

Mat2 step_operator(const ModelParams& p, Quasimomentum q) {
    return step_operator(hopping_from_params(p), q);
}

BlochDecomposition bloch_closed_form(const HoppingCoeffs& c, Quasimomentum q) {
    const double cq = std::cos(q.value());
    const double sq = std::sin(q.value());
    const cplx w = c.alpha - c.beta * cq;
    const cplx den2 = 2.0 - w * w;
    if (std::abs(den2) <= kChartTolerance) {
        throw Error(ErrorCode::EPSingular,
                    "bloch_closed_form: 2 - (alpha - beta cos q)^2 vanishes at q = " +
                        std::to_string(q.value()));
    }
    const cplx den = std::sqrt(den2);
    BlochDecomposition out;
    out.energy = std::acos(w * kInvSqrt2);
    const cplx transverse = c.beta * sq / den;
    out.n = Vec3(-(c.alpha + c.beta * cq) / den, transverse, transverse);
    return out;
}

Canonicalization canonicalize(const Mat2& u) {
    const double norm2 = frobenius2(u);
    const cplx det = u.determinant();
    if (norm2 == 0.0 || std::abs(det) <= 1e-14 * norm2) {
        throw Error(ErrorCode::DegenerateOperator, "canonical_from_operator: det u = 0");
    }
    Canonicalization out;
    Mat2 v = u;
    if (std::abs(det - 1.0) > 1e-12) {
        out.scale = 1.0 / std::sqrt(det);
        v *= out.scale;
    }
    const auto& s = pauli_matrices();
    out.step.m0 = 0.5 * v.trace();
    for (int k = 0; k < 3; ++k) {
        out.step.m(k) = 0.5 * (s[k] * v).trace();
    }
    return out;
}

CanonicalStep canonical_from_operator(const Mat2& u) {
    return canonicalize(u).step;
}

BlochDecomposition bloch_from_canonical(const CanonicalStep& cs) {
    const cplx sin_e = sqrt_one_minus_square(cs.m0);
    if (std::abs(sin_e) <= kChartTolerance) {
        if (cs.m.norm() <= 1e-8) {
            throw Error(ErrorCode::ScalarOperator,
                        "bloch_from_canonical: operator is scalar, n undefined");
        }
        throw Error(ErrorCode::EPSingular,
                    "bloch_from_canonical: sin E = 0 with m != 0 (Jordan block)");
    }
    BlochDecomposition out;
    out.energy = std::acos(cs.m0);
    out.n = kI * cs.m / sin_e;
    return out;
}

CanonicalStep canonical_from_bloch(const BlochDecomposition& b) {
    return {std::cos(b.energy), -kI * std::sin(b.energy) * b.n};
}

Mat2 effective_hamiltonian(const CanonicalStep& cs) {
    const cplx energy = std::acos(cs.m0);
    cplx ratio;  // E / sin E
    if (std::abs(energy) < 1e-4) {
        const cplx e2 = energy * energy;
        ratio = 1.0 + e2 / 6.0 + 7.0 * e2 * e2 / 360.0;
    } else {
        const cplx sin_e = sqrt_one_minus_square(cs.m0);
        if (std::abs(sin_e) <= kChartTolerance) {
            if (cs.m.norm() <= 1e-8) {
                throw Error(ErrorCode::ScalarOperator,
                            "effective_hamiltonian: U = -1 has no traceless generator");
            }
            throw Error(ErrorCode::EPSingular,
                        "effective_hamiltonian: Jordan block at E = pi");
        }
        ratio = energy / sin_e;
    }
    return (kI * ratio) * pauli_combination(cs.m);
}

HermitianSplit hermitian_split(const Mat2& h) {
    HermitianSplit out;
    out.hermitian = 0.5 * (h + h.adjoint());
    out.anti = (h - h.adjoint()) / (2.0 * kI);
    const Mat2 comm = out.hermitian * out.anti - out.anti * out.hermitian;
    out.commutator_norm = comm.norm();
    return out;
}

Eigensystem eigensystem(const Mat2& h, double ep_tolerance) {
    const cplx shift = 0.5 * h.trace();
    const Mat2 k = h - shift * Mat2::Identity();
    const cplx s = std::sqrt(k(0, 0) * k(0, 0) + k(0, 1) * k(1, 0));
    return eigensystem_from_traceless(k, shift, s, ep_tolerance);
}

Eigensystem eigensystem(const CanonicalStep& cs, double ep_tolerance) {
    // H_eff = (E / sin E) i m.sigma shares its eigenvectors with i m.sigma,
    // whose eigenvalues are +-sin E; this form stays defined at E = pi.
    Eigensystem out = eigensystem_from_traceless(kI * pauli_combination(cs.m), 0.0,
                                                 sqrt_one_minus_square(cs.m0), ep_tolerance);
    out.lambda1 = std::acos(cs.m0);
    out.lambda2 = -out.lambda1;
    return out;
}

Vec2 fix_phase_gauge(const Vec2& v) {
    for (int i = 0; i < 2; ++i) {
        const double mag = std::abs(v(i));
        if (mag > kGaugeFloor) {
            return v * (std::conj(v(i)) / mag);
        }
    }
    return v;
}

double state_fidelity(const Vec2& psi1, const Vec2& psi2) {
    const double n1 = psi1.norm();
    const double n2 = psi2.norm();
    if (n1 == 0.0 || n2 == 0.0) {
        throw Error(ErrorCode::ZeroVector, "state_fidelity: zero vector");
    }
    return std::min(1.0, std::norm(psi1.dot(psi2)) / (n1 * n1 * n2 * n2));
}

double operator_fidelity(const Mat2& a, const Mat2& b) {
    const double na = frobenius2(a);
    const double nb = frobenius2(b);
    if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::ZeroOperator, "operator_fidelity: zero operator");
    }
    const cplx overlap = (a.adjoint() * b).trace();
    return std::min(1.0, std::abs(overlap) / std::sqrt(na * nb));
}

Eigen::Vector3d stokes(const Vec2& psi) {
    const double norm2 = psi.squaredNorm();
    if (norm2 == 0.0) {
        throw Error(ErrorCode::ZeroVector, "stokes: zero vector");
    }
    const auto& s = pauli_matrices();
    Eigen::Vector3d out;
    for (int k = 0; k < 3; ++k) {
        out(k) = psi.dot(s[k] * psi).real() / norm2;
    }
    return out;
}

}  // namespace blochtomo
