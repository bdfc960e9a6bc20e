#pragma once

#include "mfloq/core.hpp"

namespace mfloq {

// Truncation thresholds for infinite products/series. Overridable per call.
struct SpecialConfig {
    double product_tail = 1e-16;  // stop q-product when |alpha/q^p| drops below this
    double theta_tail = 1e-16;    // relative term size that ends the bilateral theta sum
    int max_terms = 20000;
};

inline SpecialConfig& special_config() {
    static SpecialConfig cfg;
    return cfg;
}

// Principal-branch log-Gamma. Relative error of exp(ln_gamma) below 1e-12 for
// Re(z) >= 0.5; reflection formula elsewhere. Throws pole_error at z = 0, -1, -2, ...
cplx ln_gamma(cplx z);

// Gamma via exp(ln_gamma); overflows raise overflow_error.
cplx gamma_fn(cplx z);

// q-Gamma for q > 1 on Re(z) > 0 (and by the product formula wherever the
// denominator product has no vanishing factor). Gamma_q(p+1) = [p]_q!.
cplx q_gamma(double q, cplx z);

// log of q_gamma, evaluated without forming the (possibly huge) value.
cplx log_q_gamma(double q, cplx z);

// (q^{z-1} - 1)/(q - 1), the value of Gamma_q(z)/Gamma_q(z-1).
cplx q_bracket(double q, cplx z);

// Jacobi theta, convention Theta_q(z) = sum_{n in Z} q^{-n(n-1)/2} z^n, which
// satisfies Theta_q(qz) = qz Theta_q(z). Requires q > 1, z != 0.
cplx theta_q(double q, cplx z);

}  // namespace mfloq
