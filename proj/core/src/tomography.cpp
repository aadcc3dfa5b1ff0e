#include "blochtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <string>

namespace blochtomo {

namespace {

// coef[c][l] = <j| sigma_l |i> for channel c = (i, j), sigma_0 = identity.
using CoefTable = std::array<std::array<cplx, 4>, kChannelCount>;

const CoefTable& coefficient_table() {
    static const CoefTable table = [] {
        CoefTable t{};
        const auto& pauli = pauli_matrices();
        const auto& chans = channels();
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            const Vec2 in = ket(chans[c].input);
            const Vec2 out = ket(chans[c].projection);
            t[c][0] = out.dot(in);
            for (int l = 0; l < 3; ++l) {
                t[c][l + 1] = out.dot(pauli[l] * in);
            }
        }
        return t;
    }();
    return table;
}

cplx component(const ParamVector& x, int l) { return {x(2 * l), x(2 * l + 1)}; }

cplx determinant(const ParamVector& x) {
    const cplx m0 = component(x, 0);
    cplx det = m0 * m0;
    for (int l = 1; l < 4; ++l) {
        det -= component(x, l) * component(x, l);
    }
    return det;
}

// Constraint rows det - 1 = 0 (real and imaginary parts) and their Jacobian.
void constraint_rows(const ParamVector& x, Eigen::Vector2d& c, Eigen::Matrix<double, 2, 8>& jc) {
    const cplx det = determinant(x);
    c << det.real() - 1.0, det.imag();
    for (int l = 0; l < 4; ++l) {
        const cplx d = (l == 0 ? 2.0 : -2.0) * component(x, l);
        // d det / d Re = d, d det / d Im = i d
        jc(0, 2 * l) = d.real();
        jc(1, 2 * l) = d.imag();
        jc(0, 2 * l + 1) = -d.imag();
        jc(1, 2 * l + 1) = d.real();
    }
}

bool near_singular(const ParamVector& x) {
    return std::abs(determinant(x)) <= 1e-8 * x.squaredNorm();
}

struct LmOutcome {
    ParamVector x;
    double cost = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

ParamVector project_or_keep(const ParamVector& x) {
    const auto projected = project_to_gauge(unpack(x));
    return projected ? pack(*projected) : x;
}

LmOutcome levenberg_marquardt(const RatioSet& data, const ParamVector& start, const SolverConfig& cfg) {
    LmOutcome out;
    out.x = project_or_keep(start);
    ResidualVector r;
    ResidualJacobian jac;
    residuals(out.x, data, r, &jac);
    out.cost = r.squaredNorm();
    if (!std::isfinite(out.cost)) return out;

    double lambda = 1e-3;
    for (out.iterations = 0; out.iterations < cfg.max_iterations; ++out.iterations) {
        if (out.cost <= cfg.cost_tolerance) {
            out.converged = true;
            break;
        }
        Eigen::Matrix<double, 8, 8> a = jac.transpose() * jac;
        ParamVector g = jac.transpose() * r;
        const bool penalty = near_singular(out.x);
        if (penalty) {
            Eigen::Vector2d c;
            Eigen::Matrix<double, 2, 8> jc;
            constraint_rows(out.x, c, jc);
            a += jc.transpose() * jc;
            g += jc.transpose() * c;
        }
        if (g.lpNorm<Eigen::Infinity>() <= 1e-15) {
            out.converged = true;
            break;
        }
        const double scale = std::max(a.diagonal().maxCoeff(), 1e-12);
        bool accepted = false;
        while (!accepted) {
            const Eigen::Matrix<double, 8, 8> damped =
                a + lambda * scale * Eigen::Matrix<double, 8, 8>::Identity();
            const ParamVector step = damped.ldlt().solve(-g);
            const ParamVector trial = project_or_keep(out.x + step);
            ResidualVector r_trial;
            residuals(trial, data, r_trial);
            const double c_trial = r_trial.squaredNorm();
            if (std::isfinite(c_trial) && c_trial < out.cost) {
                const double moved = (trial - out.x).norm();
                out.x = trial;
                out.cost = c_trial;
                residuals(out.x, data, r, &jac);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (moved <= cfg.step_tolerance * (out.x.norm() + cfg.step_tolerance)) {
                    out.converged = true;
                }
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) break;
            }
        }
        if (!accepted) {
            // No descent direction left at working precision: a stationary point.
            out.converged = true;
            break;
        }
        if (out.converged) {
            ++out.iterations;
            break;
        }
    }
    if (out.cost <= cfg.cost_tolerance) out.converged = true;
    return out;
}

ReconstructionResult to_result(const LmOutcome& o, int total_iterations) {
    ReconstructionResult res;
    const auto projected = project_to_gauge(unpack(o.x));
    res.canonical = projected ? *projected : unpack(o.x);
    res.residual = o.cost;
    res.iterations = total_iterations;
    res.flags.converged = o.converged && projected.has_value();
    return res;
}

bool better(const LmOutcome& a, const LmOutcome& b) {
    if (a.converged != b.converged) return a.converged;
    return a.cost < b.cost;
}

void require_ratios(const RatioSet& data) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::DarkInput, "ratio set contains undefined channels");
        }
    }
}

// Canonical sign rule without a reference: the first component of the packed
// vector that is not negligible is positive (in practice Re m0 >= 0).
bool canonical_sign_positive(const CanonicalStep& cs) {
    const ParamVector x = pack(cs);
    const double tol = 1e-12 * std::max(x.norm(), 1e-300);
    for (int i = 0; i < 8; ++i) {
        if (std::abs(x(i)) > tol) return x(i) > 0.0;
    }
    return true;
}

}  // namespace

void SolverConfig::validate() const {
    if (max_iterations <= 0 || !(cost_tolerance > 0.0) || !(step_tolerance > 0.0) || restarts <= 0 ||
        segments <= 0) {
        throw Error(ErrorCode::ConfigError, "solver settings must be positive");
    }
}

ParamVector pack(const CanonicalStep& cs) {
    ParamVector x;
    x << cs.m0.real(), cs.m0.imag(), cs.m(0).real(), cs.m(0).imag(), cs.m(1).real(), cs.m(1).imag(),
        cs.m(2).real(), cs.m(2).imag();
    return x;
}

CanonicalStep unpack(const ParamVector& x) {
    CanonicalStep cs;
    cs.m0 = component(x, 0);
    for (int l = 0; l < 3; ++l) cs.m(l) = component(x, l + 1);
    return cs;
}

void residuals(const ParamVector& x, const RatioSet& data, ResidualVector& r, ResidualJacobian* jacobian) {
    const auto& coef = coefficient_table();
    std::array<double, kChannelCount> inten{};
    std::array<Eigen::Matrix<double, 1, 8>, kChannelCount> grad{};
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        cplx amp{0.0, 0.0};
        for (int l = 0; l < 4; ++l) amp += coef[c][l] * component(x, l);
        inten[c] = std::norm(amp);
        if (jacobian) {
            for (int l = 0; l < 4; ++l) {
                const cplx t = std::conj(amp) * coef[c][l];
                grad[c](2 * l) = 2.0 * t.real();
                grad[c](2 * l + 1) = -2.0 * t.imag();
            }
        }
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const std::size_t p = partner_channel(c);
        const double sum = inten[c] + inten[p];
        const auto row = static_cast<Eigen::Index>(c);
        if (!(sum > 0.0)) {
            r(row) = 0.5 - data[c];
            if (jacobian) jacobian->row(row).setZero();
            continue;
        }
        r(row) = inten[c] / sum - data[c];
        if (jacobian) {
            jacobian->row(row) = (grad[c] * inten[p] - grad[p] * inten[c]) / (sum * sum);
        }
    }
}

double cost(const CanonicalStep& candidate, const RatioSet& data) {
    ResidualVector r;
    residuals(pack(candidate), data, r);
    return r.squaredNorm();
}

std::optional<CanonicalStep> project_to_gauge(const CanonicalStep& cs) {
    const ParamVector x = pack(cs);
    const cplx det = determinant(x);
    if (!std::isfinite(x.squaredNorm()) || std::abs(det) <= 1e-12 * x.squaredNorm()) {
        return std::nullopt;
    }
    const cplx inv = 1.0 / std::sqrt(det);
    const ParamVector plus = pack({cs.m0 * inv, cs.m * inv});
    const ParamVector minus = -plus;
    if ((plus - x).squaredNorm() <= (minus - x).squaredNorm()) return unpack(plus);
    return unpack(minus);
}

CanonicalStep random_canonical(std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        ParamVector x;
        for (int i = 0; i < 8; ++i) x(i) = normal(gen);
        if (auto cs = project_to_gauge(unpack(x))) return *cs;
    }
}

ReconstructionResult reconstruct_pixel(const RatioSet& data, const CanonicalStep& init,
                                       const SolverConfig& cfg) {
    cfg.validate();
    require_ratios(data);
    LmOutcome best = levenberg_marquardt(data, pack(init), cfg);
    int total = best.iterations;
    if (!best.converged) {
        std::mt19937_64 gen(mix_seed(cfg.seed, 0x5eedULL));
        for (int attempt = 0; attempt < cfg.restarts && !best.converged; ++attempt) {
            const LmOutcome trial = levenberg_marquardt(data, pack(random_canonical(gen)), cfg);
            total += trial.iterations;
            if (better(trial, best)) best = trial;
        }
    }
    ReconstructionResult res = to_result(best, total);
    if (!res.flags.converged) {
        throw NotConvergedError("pixel fit did not converge after " + std::to_string(cfg.restarts) +
                                    " restarts (cost " + std::to_string(res.residual) + ")",
                                res);
    }
    return res;
}

ReconstructionResult reconstruct_pixel_multistart(const RatioSet& data, const SolverConfig& cfg) {
    cfg.validate();
    require_ratios(data);
    std::mt19937_64 gen(cfg.seed);
    LmOutcome best;
    int total = 0;
    for (int attempt = 0; attempt < cfg.restarts; ++attempt) {
        const LmOutcome trial = levenberg_marquardt(data, pack(random_canonical(gen)), cfg);
        total += trial.iterations;
        if (attempt == 0 || better(trial, best)) best = trial;
        if (best.converged && best.cost <= cfg.cost_tolerance) break;
    }
    ReconstructionResult res = to_result(best, total);
    if (!res.flags.converged) {
        throw NotConvergedError("no random start converged", res);
    }
    return res;
}

std::vector<CanonicalStep> branch_align(std::span<const CanonicalStep> steps,
                                        const std::optional<CanonicalStep>& reference) {
    std::vector<CanonicalStep> out(steps.begin(), steps.end());
    for (std::size_t k = 1; k < out.size(); ++k) {
        const Mat2 prev = out[k - 1].matrix();
        const Mat2 cur = out[k].matrix();
        if ((cur + prev).squaredNorm() < (cur - prev).squaredNorm()) {
            out[k] = out[k].negated();
        }
    }
    if (out.empty()) return out;
    bool flip;
    if (reference) {
        const Mat2 ref = reference->matrix();
        const Mat2 first = out.front().matrix();
        flip = (first + ref).squaredNorm() < (first - ref).squaredNorm();
    } else {
        flip = !canonical_sign_positive(out.front());
    }
    if (flip) {
        for (auto& cs : out) cs = cs.negated();
    }
    return out;
}

std::vector<CanonicalStep> BandReconstruction::canonicals() const {
    std::vector<CanonicalStep> out;
    out.reserve(pixels.size());
    for (const auto& p : pixels) out.push_back(p.canonical);
    return out;
}

namespace {

ReconstructionResult settle(const std::function<ReconstructionResult()>& fit) {
    try {
        return fit();
    } catch (const NotConvergedError& e) {
        return e.best();
    }
}

// Sweeps records [begin, end): multistart at the first lit pixel, warm
// starts afterwards.
std::vector<ReconstructionResult> sweep(const PolarimetrySet& data, std::size_t begin, std::size_t end,
                                        const SolverConfig& cfg) {
    std::vector<ReconstructionResult> out;
    out.reserve(end - begin);
    std::optional<ReconstructionResult> prev;
    for (std::size_t k = begin; k < end; ++k) {
        const auto& rec = data.records[k];
        SolverConfig local = cfg;
        local.seed = mix_seed(cfg.seed, k);
        if (rec.dark) {
            ReconstructionResult res;
            if (prev) res.canonical = prev->canonical;
            res.flags.dark_input = true;
            out.push_back(res);
            continue;
        }
        ReconstructionResult res;
        if (!prev) {
            res = settle([&] { return reconstruct_pixel_multistart(rec.ratios, local); });
        } else {
            res = settle([&] { return reconstruct_pixel(rec.ratios, prev->canonical, local); });
            // A warm start can land in a worse basin than its neighbor; compare
            // against a cold multistart before accepting it.
            const double guard = std::max(100.0 * prev->residual, 1e3 * cfg.cost_tolerance);
            if (res.residual > guard) {
                ReconstructionResult cold =
                    settle([&] { return reconstruct_pixel_multistart(rec.ratios, local); });
                cold.iterations += res.iterations;
                if (cold.residual < res.residual) res = cold;
            }
        }
        prev = res;
        out.push_back(res);
    }
    return out;
}

}  // namespace

BandReconstruction reconstruct_bz(const PolarimetrySet& data, const SolverConfig& cfg,
                                  const std::optional<CanonicalStep>& sign_reference) {
    cfg.validate();
    if (data.size() < 2) {
        throw Error(ErrorCode::GridError, "reconstruct_bz needs at least 2 momenta");
    }
    const std::size_t n = data.size();
    BandReconstruction band;
    band.q.reserve(n);
    for (const auto& rec : data.records) band.q.push_back(rec.q);

    if (cfg.parallel && cfg.segments > 1) {
        const std::size_t segs = std::min<std::size_t>(static_cast<std::size_t>(cfg.segments), n);
        std::vector<std::future<std::vector<ReconstructionResult>>> jobs;
        for (std::size_t s = 0; s < segs; ++s) {
            const std::size_t b = s * n / segs;
            const std::size_t e = (s + 1) * n / segs;
            jobs.push_back(std::async(std::launch::async, [&data, &cfg, b, e] { return sweep(data, b, e, cfg); }));
        }
        for (auto& job : jobs) {
            auto part = job.get();
            band.pixels.insert(band.pixels.end(), part.begin(), part.end());
        }
    } else {
        band.pixels = sweep(data, 0, n, cfg);
    }

    const auto aligned = branch_align(band.canonicals(), sign_reference);
    band.bloch.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto& px = band.pixels[k];
        px.canonical = aligned[k];
        if (px.flags.dark_input) continue;
        try {
            band.bloch[k] = bloch_from_canonical(px.canonical);
            if (eigensystem(px.canonical).coalesced) px.flags.ep_suspect = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EPSingular && e.code() != ErrorCode::ScalarOperator) throw;
            px.flags.ep_suspect = true;
        }
    }
    return band;
}

}  // namespace blochtomo
