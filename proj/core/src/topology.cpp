#include "blochtomo/topology.hpp"

#include "blochtomo/errors.hpp"
#include "blochtomo/pt_symmetry.hpp"
#include "blochtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

namespace blochtomo {

namespace {

const double kSqrt2 = std::numbers::sqrt2;

// Neighbor sign-matched to the reference sample.
Vec3 matched(const Vec3& neighbor, const Vec3& reference) {
    return (neighbor + reference).squaredNorm() < (neighbor - reference).squaredNorm() ? Vec3(-neighbor)
                                                                                       : neighbor;
}

// Eigen's cross() conjugates complex results; the winding sum needs the bilinear one.
Vec3 bilinear_cross(const Vec3& a, const Vec3& b) {
    return Vec3(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

void check_uniform(std::span<const double> q) {
    const std::size_t n = q.size();
    const double h = kTwoPi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double expected = q[0] + h * static_cast<double>(k);
        const double diff = std::remainder(q[k] - expected, kTwoPi);
        if (std::abs(diff) > 1e-9) {
            throw Error(ErrorCode::GridError, "winding_number needs a uniform grid covering [0, 2 pi)");
        }
    }
}

cplx ep_equation(double delta, double q, double eta, double sign) {
    const HoppingCoeffs c = hopping_from_params(ModelParams(delta, eta));
    return c.alpha - c.beta * std::cos(q) - sign * kSqrt2;
}

double dual_residual(double delta, double q, double eta) {
    const HoppingCoeffs c = hopping_from_params(ModelParams(delta, eta));
    const cplx w = c.alpha - c.beta * std::cos(q);
    return std::abs(2.0 - w * w);
}

}  // namespace

cplx winding_number(std::span<const double> q, std::span<const Vec3> n) {
    if (q.size() != n.size()) {
        throw Error(ErrorCode::GridError, "winding_number: q and n differ in length");
    }
    if (n.size() < 8) {
        throw Error(ErrorCode::GridError, "winding_number needs at least 8 samples");
    }
    check_uniform(q);
    const Vec3 s = Vec3(0.0, 1.0, -1.0) / kSqrt2;
    const std::size_t size = n.size();
    cplx total{0.0, 0.0};
    for (std::size_t k = 0; k < size; ++k) {
        const Vec3& cur = n[k];
        const Vec3 next = matched(n[(k + 1) % size], cur);
        const Vec3 prev = matched(n[(k + size - 1) % size], cur);
        const Vec3 dn = 0.5 * (next - prev);
        total += bilinear_dot(bilinear_cross(cur, dn), s);
    }
    return total / kTwoPi;
}

std::vector<Vec3> align_bloch_vectors(std::span<const Vec3> n) {
    std::vector<Vec3> out(n.begin(), n.end());
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = matched(out[k], out[k - 1]);
    return out;
}

double sublattice_residual(std::span<const Vec3> n) {
    double worst = 0.0;
    for (const auto& v : n) worst = std::max(worst, std::abs(v(1) - v(2)));
    return worst;
}

std::vector<Vec3> ClosedFormBand::bloch_vectors() const {
    std::vector<Vec3> out;
    out.reserve(bloch.size());
    for (std::size_t k = 0; k < bloch.size(); ++k) {
        if (!bloch[k]) {
            throw Error(ErrorCode::EPSingular, "Bloch chart singular at q = " + std::to_string(q[k]));
        }
        out.push_back(bloch[k]->n);
    }
    return out;
}

ClosedFormBand closed_form_band(const ModelParams& p, int n_q) {
    ClosedFormBand band;
    band.q = uniform_grid(n_q);
    const HoppingCoeffs c = hopping_from_params(p);
    for (double q : band.q) {
        const Quasimomentum qm(q);
        band.steps.push_back(canonical_from_operator(step_operator(c, qm)));
        try {
            band.bloch.emplace_back(bloch_closed_form(c, qm));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EPSingular) throw;
            band.bloch.emplace_back(std::nullopt);
        }
    }
    return band;
}

PhaseDiagram phase_diagram(AxisRange delta, AxisRange eta, int resolution, int n_q) {
    if (resolution < 8) {
        throw Error(ErrorCode::GridError, "phase_diagram needs at least 8 points per axis");
    }
    auto linspace = [resolution](AxisRange r) {
        std::vector<double> v(static_cast<std::size_t>(resolution));
        for (int i = 0; i < resolution; ++i) {
            v[static_cast<std::size_t>(i)] = r.lo + (r.hi - r.lo) * i / (resolution - 1);
        }
        return v;
    };
    PhaseDiagram pd;
    pd.delta_grid = linspace(delta);
    pd.eta_grid = linspace(eta);
    const std::size_t nd = pd.delta_grid.size();
    const std::size_t ne = pd.eta_grid.size();
    pd.nu.assign(nd * ne, std::numeric_limits<double>::quiet_NaN());
    pd.nu_imag_residual.assign(nd * ne, std::numeric_limits<double>::quiet_NaN());

    auto row = [&pd, ne, n_q](std::size_t i) {
        for (std::size_t j = 0; j < ne; ++j) {
            const ClosedFormBand band = closed_form_band(ModelParams(pd.delta_grid[i], pd.eta_grid[j]), n_q);
            try {
                const auto n = band.bloch_vectors();
                const cplx nu = winding_number(band.q, n);
                pd.nu[i * ne + j] = nu.real();
                pd.nu_imag_residual[i * ne + j] = nu.imag();
            } catch (const Error& e) {
                if (e.code() != ErrorCode::EPSingular) throw;
            }
        }
    };
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&row, w, workers, nd] {
            for (std::size_t i = w; i < nd; i += workers) row(i);
        }));
    }
    for (auto& job : jobs) job.get();
    return pd;
}

std::vector<EPRecord> find_exceptional_points(double delta, double q_init, double eta_init) {
    if (!std::isfinite(delta) || !std::isfinite(q_init) || !std::isfinite(eta_init)) {
        throw Error(ErrorCode::ConfigError, "find_exceptional_points: non-finite input");
    }
    const HoppingCoeffs c0 = hopping_from_params(ModelParams(delta, eta_init));
    const double sign = (c0.alpha - c0.beta * std::cos(q_init)).real() >= 0.0 ? 1.0 : -1.0;

    double q = q_init;
    double eta = eta_init;
    auto value = [&](double qq, double ee) {
        const cplx g = ep_equation(delta, qq, ee, sign);
        return Eigen::Vector2d(g.real(), g.imag());
    };
    Eigen::Vector2d f = value(q, eta);
    bool converged = false;
    constexpr double h = 1e-6;
    for (int it = 0; it < 100 && !converged; ++it) {
        if (f.norm() <= 1e-14) {
            converged = true;
            break;
        }
        Eigen::Matrix2d jac;
        jac.col(0) = (value(q + h, eta) - value(q - h, eta)) / (2.0 * h);
        jac.col(1) = (value(q, eta + h) - value(q, eta - h)) / (2.0 * h);
        const Eigen::Vector2d step = jac.fullPivLu().solve(-f);
        if (!step.allFinite()) break;
        double t = 1.0;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            const Eigen::Vector2d trial = value(q + t * step(0), eta + t * step(1));
            if (trial.norm() < f.norm()) {
                q += t * step(0);
                eta += t * step(1);
                f = trial;
                break;
            }
        }
        if (t * step.norm() <= 1e-15) converged = f.norm() <= 1e-10;
    }
    if (!converged && f.norm() > 1e-12) {
        throw Error(ErrorCode::NoConvergence, "exceptional-point Newton iteration did not converge");
    }

    q = wrap_angle(q);
    if (q > std::numbers::pi) q = kTwoPi - q;

    std::vector<EPRecord> out;
    for (double qc : {q, kTwoPi - q}) {
        const double dual = dual_residual(delta, qc, eta);
        CanonicalStep cs = canonical_from_operator(step_operator(ModelParams(delta, eta), Quasimomentum(qc)));
        if (sign < 0.0) cs = cs.negated();
        const RotatedForm rf = rotate_hamiltonian(effective_hamiltonian(cs));
        const double za = std::abs(rf.z_a);
        const double zb = std::abs(rf.z_b);
        if (std::max(za, zb) <= 1e-9) {
            throw Error(ErrorCode::NotAnEP, "both rotated off-diagonals vanish: diabolic point");
        }
        EPRecord rec;
        rec.q_c = qc;
        rec.eta_c = eta;
        rec.branch = za <= zb ? EPBranch::ZA : EPBranch::ZB;
        rec.residual = std::max(dual, std::min(za, zb));
        rec.alpha_sign = sign;
        if (rec.residual > 1e-9) {
            throw Error(ErrorCode::NoConvergence, "root fails the rotated-frame EP check");
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<EPRecord> find_exceptional_points(double delta, double eta_max) {
    if (!(eta_max > 0.0)) {
        throw Error(ErrorCode::ConfigError, "eta_max must be positive");
    }
    constexpr int nq = 181;
    constexpr int ne = 401;
    double best = std::numeric_limits<double>::infinity();
    double q0 = 0.0;
    double e0 = 0.0;
    for (int i = 0; i < nq; ++i) {
        const double q = std::numbers::pi * i / (nq - 1);
        for (int j = 0; j < ne; ++j) {
            const double eta = eta_max * j / (ne - 1);
            const double r = dual_residual(delta, q, eta);
            if (r < best) {
                best = r;
                q0 = q;
                e0 = eta;
            }
        }
    }
    return find_exceptional_points(delta, q0, e0);
}

std::vector<double> infidelity_profile(std::span<const CanonicalStep> steps) {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& cs : steps) {
        const Eigensystem es = eigensystem(cs);
        out.push_back(1.0 - state_fidelity(es.psi1, es.psi2));
    }
    return out;
}

std::vector<std::size_t> local_minima(std::span<const double> profile) {
    std::vector<std::size_t> out;
    const std::size_t n = profile.size();
    if (n < 3) return out;
    for (std::size_t k = 0; k < n; ++k) {
        if (profile[k] < profile[(k + n - 1) % n] && profile[k] < profile[(k + 1) % n]) out.push_back(k);
    }
    return out;
}

CriticalMomentum critical_momentum(std::span<const double> q, std::span<const double> infidelity) {
    if (q.size() != infidelity.size() || q.size() < 8) {
        throw Error(ErrorCode::GridError, "critical_momentum needs at least 8 matching samples");
    }
    auto minima = local_minima(infidelity);
    std::sort(minima.begin(), minima.end(),
              [&](std::size_t a, std::size_t b) { return infidelity[a] < infidelity[b]; });
    const std::size_t n = q.size();
    std::size_t first;
    std::size_t second;
    if (minima.size() >= 2) {
        first = minima[0];
        second = minima[1];
    } else {
        first = static_cast<std::size_t>(
            std::min_element(infidelity.begin(), infidelity.end()) - infidelity.begin());
        second = (n - first) % n;
    }
    if (q[second] < q[first]) std::swap(first, second);
    const auto [lo, hi] = std::minmax_element(infidelity.begin(), infidelity.end());
    CriticalMomentum cm;
    cm.k_first = first;
    cm.k_second = second;
    cm.q_first = q[first];
    cm.q_second = q[second];
    cm.min_infidelity = *lo;
    cm.shallow = (*hi - *lo) < 0.1;
    return cm;
}

CriticalMomentum critical_momentum(double delta, double eta, int n_q) {
    if (n_q < 8) {
        throw Error(ErrorCode::GridError, "critical_momentum needs n_q >= 8");
    }
    const ClosedFormBand band = closed_form_band(ModelParams(delta, eta), n_q);
    const auto profile = infidelity_profile(band.steps);
    return critical_momentum(band.q, profile);
}

HarmonicBand HarmonicBand::fit(std::span<const double> q, std::span<const CanonicalStep> steps) {
    if (q.size() != steps.size() || q.size() < 3) {
        throw Error(ErrorCode::GridError, "harmonic fit needs at least 3 matching samples");
    }
    const auto n = static_cast<Eigen::Index>(q.size());
    Eigen::MatrixX3cd design(n, 3);
    Eigen::MatrixX4cd rhs(n, 4);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double qk = q[static_cast<std::size_t>(k)];
        design(k, 0) = 1.0;
        design(k, 1) = std::cos(qk);
        design(k, 2) = std::sin(qk);
        const auto& cs = steps[static_cast<std::size_t>(k)];
        rhs(k, 0) = cs.m0;
        for (int l = 0; l < 3; ++l) rhs(k, l + 1) = cs.m(l);
    }
    const Eigen::Matrix<cplx, 3, 4> sol = design.colPivHouseholderQr().solve(rhs);
    HarmonicBand band;
    for (int l = 0; l < 4; ++l) {
        for (int h = 0; h < 3; ++h) band.coeffs_[l][h] = sol(h, l);
    }
    band.residual_ = (design * sol - rhs).norm() / std::sqrt(static_cast<double>(n));
    return band;
}

CanonicalStep HarmonicBand::at(double q) const {
    auto eval = [&](int l) { return coeffs_[l][0] + coeffs_[l][1] * std::cos(q) + coeffs_[l][2] * std::sin(q); };
    CanonicalStep cs;
    cs.m0 = eval(0);
    for (int l = 0; l < 3; ++l) cs.m(l) = eval(l + 1);
    const auto projected = project_to_gauge(cs);
    if (!projected) {
        throw Error(ErrorCode::DegenerateOperator, "harmonic band is singular at q = " + std::to_string(q));
    }
    return *projected;
}

std::optional<std::pair<double, double>> HarmonicBand::pure_spectrum_momenta() const {
    const double a = coeffs_[0][0].imag();
    const double b = coeffs_[0][1].imag();
    const double c = coeffs_[0][2].imag();
    auto im_m0 = [&](double q) { return a + b * std::cos(q) + c * std::sin(q); };
    const double scale = std::abs(a) + std::abs(b) + std::abs(c);
    if (scale <= 1e-12) return std::nullopt;  // Hermitian: real spectrum everywhere

    constexpr int samples = 4096;
    std::vector<double> roots;
    double q_prev = 0.0;
    double f_prev = im_m0(q_prev);
    for (int i = 1; i <= samples && roots.size() < 3; ++i) {
        const double q = kTwoPi * i / samples;
        const double f = im_m0(q);
        if (f_prev == 0.0) {
            roots.push_back(q_prev);
        } else if ((f_prev < 0.0) != (f < 0.0) && f != 0.0) {
            double lo = q_prev;
            double hi = q;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((im_m0(mid) < 0.0) == (f_prev < 0.0)) lo = mid; else hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        q_prev = q;
        f_prev = f;
    }
    if (roots.size() != 2) return std::nullopt;
    return std::make_pair(roots[0], roots[1]);
}

}  // namespace blochtomo
