// calibration.hpp — plate birefringence and dichroism from bench readings

#pragma once

namespace blochtomo {

struct CalibrationReading {
    double i_ll = 0.0;   // circular input, same-handed projection
    double i_lr = 0.0;   // circular input, opposite-handed projection
    double i_ord = 0.0;  // ordinary-axis transmittance
    double i_ext = 0.0;  // extraordinary-axis transmittance
};

/// delta = 2 atan(sqrt(i_lr / i_ll)), lossless plate.  Throws InvalidReading.
double calibrate_delta_plain(const CalibrationReading& r);

/// eta = log(i_ord / i_ext) / 2.  Throws InvalidReading.
double calibrate_eta(const CalibrationReading& r);

/// delta = acos(((i_ll - i_lr) / (i_ll + i_lr)) cosh eta).  Throws
/// InvalidReading, or OutOfDomain when the argument leaves [-1, 1].
double calibrate_delta_dichroic(const CalibrationReading& r, double eta);

/// Noiseless bench readings of a single plate with the given settings.
CalibrationReading forward_readings(double delta, double eta);

}  // namespace blochtomo
