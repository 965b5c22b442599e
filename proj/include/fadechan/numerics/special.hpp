// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace fadechan {

// Modified Bessel functions of the first kind. The unscaled forms return
// +inf (errno = ERANGE) once e^|x| overflows; the *_e forms are multiplied
// by e^{-|x|} and stay finite for every finite x.
double bessel_i0(double x);
double bessel_i1(double x);
double bessel_i0e(double x);
double bessel_i1e(double x);

// Principal branch of the Lambert W function, x >= -1/e.
double lambert_w0(double x);

// W(e^y) without forming e^y; valid for any finite y.
double lambert_w0_exp(double y);

// Generalized Marcum Q-function of order one, a, b >= 0.
double marcum_q(double a, double b);

// Standard normal quantile, p in (0, 1).
double normal_quantile(double p);

}  // namespace fadechan
