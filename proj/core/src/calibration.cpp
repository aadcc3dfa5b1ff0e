#include "blochtomo/calibration.hpp"

#include "blochtomo/errors.hpp"
#include "blochtomo/spectral.hpp"

#include <cmath>

namespace blochtomo {

namespace {

void require_non_negative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::InvalidReading, std::string(name) + " must be a finite non-negative intensity");
    }
}

}  // namespace

double calibrate_delta_plain(const CalibrationReading& r) {
    require_non_negative(r.i_ll, "i_ll");
    require_non_negative(r.i_lr, "i_lr");
    if (!(r.i_ll > 0.0)) {
        throw Error(ErrorCode::InvalidReading, "i_ll must be positive");
    }
    return 2.0 * std::atan(std::sqrt(r.i_lr / r.i_ll));
}

double calibrate_eta(const CalibrationReading& r) {
    require_non_negative(r.i_ord, "i_ord");
    require_non_negative(r.i_ext, "i_ext");
    if (!(r.i_ord > 0.0) || !(r.i_ext > 0.0)) {
        throw Error(ErrorCode::InvalidReading, "i_ord and i_ext must be positive");
    }
    return 0.5 * std::log(r.i_ord / r.i_ext);
}

double calibrate_delta_dichroic(const CalibrationReading& r, double eta) {
    require_non_negative(r.i_ll, "i_ll");
    require_non_negative(r.i_lr, "i_lr");
    const double sum = r.i_ll + r.i_lr;
    if (!(sum > 0.0) || !std::isfinite(eta)) {
        throw Error(ErrorCode::InvalidReading, "circular readings sum to zero");
    }
    const double arg = (r.i_ll - r.i_lr) / sum * std::cosh(eta);
    if (std::abs(arg) > 1.0) {
        throw Error(ErrorCode::OutOfDomain, "arccos argument " + std::to_string(arg) +
                                                " outside [-1, 1]: readings inconsistent with eta");
    }
    return std::acos(arg);
}

CalibrationReading forward_readings(double delta, double eta) {
    const HoppingCoeffs c = hopping_from_params(ModelParams(delta, eta));
    CalibrationReading r;
    r.i_ll = std::norm(c.alpha);
    r.i_lr = std::norm(c.beta);
    r.i_ord = std::exp(eta);
    r.i_ext = std::exp(-eta);
    return r;
}

}  // namespace blochtomo
