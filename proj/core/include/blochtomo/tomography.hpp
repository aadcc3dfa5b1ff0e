// tomography.hpp — per-momentum constrained least-squares process tomography
//
// Each pixel is fitted in the det-gauge chart (m0, m): eight real unknowns
// with the complex constraint m0^2 - m.m = 1.  The constraint is enforced by
// projecting every iterate back onto the gauge surface; where that projection
// is ill-defined (det ~ 0) a quadratic penalty on the constraint takes over.
// The Brillouin zone is swept in q order, warm-starting each pixel from its
// predecessor, and the +-U ambiguity is fixed afterwards by branch_align.

#pragma once

#include "blochtomo/errors.hpp"
#include "blochtomo/polarimetry.hpp"
#include "blochtomo/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace blochtomo {

struct SolverConfig {
    int max_iterations = 200;
    double cost_tolerance = 1e-18;
    double step_tolerance = 1e-12;
    int restarts = 20;
    std::uint64_t seed = 1;
    bool parallel = false;
    int segments = 4;  // parallel mode only

    void validate() const;

    static SolverConfig noiseless() { return {}; }
    static SolverConfig noisy() {
        SolverConfig cfg;
        cfg.cost_tolerance = 1e-10;
        return cfg;
    }
};

struct PixelFlags {
    bool converged = false;
    bool ep_suspect = false;
    bool dark_input = false;
};

struct ReconstructionResult {
    CanonicalStep canonical;
    double residual = 0.0;
    int iterations = 0;
    PixelFlags flags;
};

class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, ReconstructionResult best)
        : Error(ErrorCode::NotConverged, what), best_(std::move(best)) {}

    const ReconstructionResult& best() const noexcept { return best_; }

private:
    ReconstructionResult best_;
};

using ParamVector = Eigen::Matrix<double, 8, 1>;
using ResidualVector = Eigen::Matrix<double, 18, 1>;
using ResidualJacobian = Eigen::Matrix<double, 18, 8>;

/// (Re m0, Im m0, Re mx, Im mx, Re my, Im my, Re mz, Im mz).
ParamVector pack(const CanonicalStep& cs);
CanonicalStep unpack(const ParamVector& x);

/// Model ratios minus data, and its analytic Jacobian in the packed parameters.
void residuals(const ParamVector& x, const RatioSet& data, ResidualVector& r,
               ResidualJacobian* jacobian = nullptr);

/// Sum of squared ratio differences between data and the candidate's model.
double cost(const CanonicalStep& candidate, const RatioSet& data);

/// Rescales onto m0^2 - m.m = 1, choosing the sign closest to the input.
/// Returns nullopt when the operator is (numerically) singular.
std::optional<CanonicalStep> project_to_gauge(const CanonicalStep& cs);

/// Random point on the gauge surface.
CanonicalStep random_canonical(std::mt19937_64& gen);

/// Local fit from `init`; on failure retries from seeded random starts up to
/// cfg.restarts times.  Throws NotConvergedError carrying the best attempt.
ReconstructionResult reconstruct_pixel(const RatioSet& data, const CanonicalStep& init,
                                       const SolverConfig& cfg);

/// Best of cfg.restarts random starts (stops early once the cost tolerance is met).
ReconstructionResult reconstruct_pixel_multistart(const RatioSet& data, const SolverConfig& cfg);

/// Sign-aligns consecutive pixels for continuity, then fixes the global sign:
/// Re m0 >= 0 at the first pixel, or the sign closest to `reference` if given.
std::vector<CanonicalStep> branch_align(std::span<const CanonicalStep> steps,
                                        const std::optional<CanonicalStep>& reference = std::nullopt);

struct BandReconstruction {
    std::vector<double> q;
    std::vector<ReconstructionResult> pixels;
    std::vector<std::optional<BlochDecomposition>> bloch;  // nullopt where the chart fails

    std::vector<CanonicalStep> canonicals() const;
};

/// Continuation sweep over the Brillouin zone.  `sign_reference` is the
/// expected step at the first pixel, used only to pick the global +-U sign.
BandReconstruction reconstruct_bz(const PolarimetrySet& data, const SolverConfig& cfg,
                                  const std::optional<CanonicalStep>& sign_reference = std::nullopt);

}  // namespace blochtomo
