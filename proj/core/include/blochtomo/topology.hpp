// topology.hpp — winding numbers, phase diagrams and exceptional points

#pragma once

#include "blochtomo/polarimetry.hpp"
#include "blochtomo/spectral.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace blochtomo {

/// Complex winding of a Bloch-vector loop sampled on a uniform periodic grid.
/// Central differences with periodic wrap; each neighbor is sign-matched to
/// the sample it is differenced against, so per-sample +-n flips cancel.
/// Throws GridError for fewer than 8 samples or a non-uniform grid.
cplx winding_number(std::span<const double> q, std::span<const Vec3> n);

/// Flips signs so consecutive samples are continuous (first sample kept).
std::vector<Vec3> align_bloch_vectors(std::span<const Vec3> n);

/// max_q |n_y - n_z|.
double sublattice_residual(std::span<const Vec3> n);

struct ClosedFormBand {
    std::vector<double> q;
    std::vector<CanonicalStep> steps;
    std::vector<std::optional<BlochDecomposition>> bloch;  // nullopt at singular momenta

    /// All Bloch vectors; throws EPSingular if any sample is singular.
    std::vector<Vec3> bloch_vectors() const;
};

ClosedFormBand closed_form_band(const ModelParams& p, int n_q);

struct PhaseDiagram {
    std::vector<double> delta_grid;
    std::vector<double> eta_grid;
    std::vector<double> nu;                // nu[i * eta_grid.size() + j], NaN where singular
    std::vector<double> nu_imag_residual;

    double at(std::size_t i_delta, std::size_t j_eta) const { return nu[i_delta * eta_grid.size() + j_eta]; }
};

struct AxisRange {
    double lo;
    double hi;
};

/// Closed-form winding over an inclusive (delta, eta) grid, resolution >= 8 per axis.
PhaseDiagram phase_diagram(AxisRange delta, AxisRange eta, int resolution, int n_q);

enum class EPBranch { ZA, ZB };

struct EPRecord {
    double q_c = 0.0;
    double eta_c = 0.0;
    EPBranch branch = EPBranch::ZA;
    double residual = 0.0;     // max of |2 - w^2| and the vanishing off-diagonal
    double alpha_sign = 1.0;   // which root of alpha - beta cos q = +-sqrt 2
};

/// Newton polish of alpha - beta cos q = +-sqrt 2 from (q_init, eta_init).
/// Returns the pair (q_c, 2 pi - q_c).  Throws NoConvergence or NotAnEP.
std::vector<EPRecord> find_exceptional_points(double delta, double q_init, double eta_init);

/// Dense (q, eta) scan over q in [0, pi], eta in [0, eta_max] as the
/// initial guess, then Newton polish.
std::vector<EPRecord> find_exceptional_points(double delta, double eta_max = 4.0);

/// 1 - |<psi1|psi2>|^2 of the H_eff right eigenvectors at each step.
std::vector<double> infidelity_profile(std::span<const CanonicalStep> steps);

/// Strict local minima of a periodic profile.
std::vector<std::size_t> local_minima(std::span<const double> profile);

struct CriticalMomentum {
    double q_first = 0.0;
    double q_second = 0.0;
    std::size_t k_first = 0;
    std::size_t k_second = 0;
    double min_infidelity = 0.0;
    bool shallow = false;  // profile depth below 0.1
};

/// Two lowest infidelity minima on the closed-form grid.  Falls back to the
/// global minimum and its mirror pixel when the profile has fewer minima.
CriticalMomentum critical_momentum(double delta, double eta, int n_q);
CriticalMomentum critical_momentum(std::span<const double> q, std::span<const double> infidelity);

/// Least-squares fit of every (m0, m) component to c0 + c1 cos q + s1 sin q.
/// Nearest-neighbor walks carry only the first harmonic, so the fit is exact
/// for noiseless input and smooths noisy input.
class HarmonicBand {
public:
    static HarmonicBand fit(std::span<const double> q, std::span<const CanonicalStep> steps);

    /// Gauge-projected step at q.
    CanonicalStep at(double q) const;

    /// Momenta in (0, pi) and (pi, 2 pi) where Im m0 changes sign, i.e. where
    /// the spectrum of H_eff is purely real or purely imaginary.
    std::optional<std::pair<double, double>> pure_spectrum_momenta() const;

    double fit_residual() const { return residual_; }

private:
    std::array<std::array<cplx, 3>, 4> coeffs_{};  // per component: c0, cos, sin
    double residual_ = 0.0;
};

}  // namespace blochtomo
