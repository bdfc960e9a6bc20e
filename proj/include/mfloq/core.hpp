#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mfloq {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode of the library maps to one of these so
// callers (and the CLI) can translate them into structured reports.
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct domain_error : error {
    using error::error;
};
struct pole_error : error {
    using error::error;
};
struct overflow_error : error {
    using error::error;
};
struct branch_cut_error : error {
    using error::error;
};
struct division_by_zero : error {
    using error::error;
};
struct singular_matrix : error {
    using error::error;
};
struct convergence_error : error {
    using error::error;
};
struct ill_conditioned : error {
    using error::error;
};
struct hint_rejected : error {
    using error::error;
};
struct dimension_mismatch : error {
    using error::error;
};
struct non_commuting : error {
    using error::error;
};
struct resonant : error {
    using error::error;
};
struct no_exponent_found : error {
    using error::error;
};
struct h3_unavailable : error {
    using error::error;
};
struct telescope_divergence : error {
    using error::error;
};
struct pole_proximity : error {
    using error::error;
};
struct eigvec_residual : error {
    using error::error;
};
struct growth_overflow : error {
    using error::error;
};
struct parse_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline void require_finite(cplx z, const char* what) {
    if (!is_finite(z)) throw overflow_error(std::string(what) + ": value is not finite");
}

inline bool on_negative_cut(cplx z) { return z.imag() == 0.0 && z.real() <= 0.0; }

// Principal-branch power z^w = exp(w log z), log the principal logarithm.
inline cplx principal_power(cplx z, cplx w) {
    if (z == cplx(0.0)) {
        if (w == cplx(0.0)) return cplx(1.0);
        if (w.real() > 0.0 && w.imag() == 0.0) return cplx(0.0);
        throw branch_cut_error("principal_power: 0 raised to non-positive exponent");
    }
    return std::exp(w * std::log(z));
}

inline bool near_integer(double x, double tol = 1e-12) { return std::abs(x - std::round(x)) <= tol; }

inline bool near_nonpositive_integer(cplx z, double tol = 1e-12) {
    return std::abs(z.imag()) <= tol && z.real() <= 0.5 && near_integer(z.real(), tol);
}

}  // namespace mfloq
