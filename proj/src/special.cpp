#include "mfloq/special.hpp"

#include <cmath>

namespace mfloq {

namespace {

// Lanczos coefficients, g = 7, 9 terms (Godfrey's set).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7,
};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * M_PI);

// ln Gamma on Re(z) >= 0.5.
cplx ln_gamma_core(cplx z) {
    const cplx w = z - 1.0;
    cplx s = kLanczos[0];
    for (int k = 1; k < 9; ++k) s += kLanczos[k] / (w + static_cast<double>(k));
    const cplx t = w + kLanczosG + 0.5;
    return kHalfLog2Pi + (w + 0.5) * std::log(t) - t + std::log(s);
}

// log(sin(pi z)) with protection against sinh overflow for large |Im z|.
cplx log_sin_pi(cplx z) {
    const cplx w = M_PI * z;
    const double im = w.imag();
    if (std::abs(im) < 30.0) return std::log(std::sin(w));
    const cplx i(0.0, 1.0);
    // sin w = -(e^{-iw}/2i)(1 - e^{2iw}) for Im w > 0, mirrored otherwise.
    if (im > 0.0)
        return -i * w - std::log(2.0 * i) + std::log(1.0 - std::exp(2.0 * i * w));
    return i * w - std::log(-2.0 * i) + std::log(1.0 - std::exp(-2.0 * i * w));
}

}  // namespace

cplx ln_gamma(cplx z) {
    if (near_nonpositive_integer(z))
        throw pole_error("ln_gamma: pole at nonpositive integer " + std::to_string(z.real()));
    cplx r;
    if (z.real() >= 0.5) {
        r = ln_gamma_core(z);
    } else {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z). The imaginary part is
        // principal-composed, not continued across cuts; consumers use exp() or
        // differences, where 2*pi*i ambiguities cancel.
        r = std::log(M_PI) - log_sin_pi(z) - ln_gamma_core(1.0 - z);
    }
    require_finite(r, "ln_gamma");
    return r;
}

cplx gamma_fn(cplx z) {
    cplx g = std::exp(ln_gamma(z));
    require_finite(g, "gamma_fn");
    return g;
}

cplx log_q_gamma(double q, cplx z) {
    if (!(q > 1.0)) throw domain_error("q_gamma: requires q > 1");
    const SpecialConfig& cfg = special_config();
    const double lq = std::log(q);

    // log (alpha; q^-1)_inf = sum_p log(1 - alpha q^-p), truncated once the
    // factor magnitude falls under cfg.product_tail.
    auto log_qpoch = [&](cplx alpha) {
        cplx acc = 0.0;
        cplx a = alpha;
        for (int p = 0; p < cfg.max_terms; ++p) {
            if (std::abs(a) < cfg.product_tail) break;
            const cplx factor = 1.0 - a;
            if (std::abs(factor) < 1e-14)
                throw pole_error("q_gamma: vanishing product factor (pole of Gamma_q)");
            acc += std::log(factor);
            a /= q;
        }
        return acc;
    };

    const cplx num = log_qpoch(cplx(1.0 / q));
    const cplx den = log_qpoch(std::exp(-z * lq));
    return num - den + (1.0 - z) * std::log(q - 1.0) + z * (z - 1.0) * 0.5 * lq;
}

cplx q_gamma(double q, cplx z) {
    cplx g = std::exp(log_q_gamma(q, z));
    require_finite(g, "q_gamma");
    return g;
}

cplx q_bracket(double q, cplx z) {
    if (!(q > 1.0)) throw domain_error("q_bracket: requires q > 1");
    cplx r = (std::exp((z - 1.0) * std::log(q)) - 1.0) / (q - 1.0);
    require_finite(r, "q_bracket");
    return r;
}

cplx theta_q(double q, cplx z) {
    if (!(q > 1.0)) throw domain_error("theta_q: requires q > 1");
    if (z == cplx(0.0)) throw domain_error("theta_q: z = 0");
    const SpecialConfig& cfg = special_config();

    // term(n) = q^{-n(n-1)/2} z^n; stepping up multiplies by z q^{-n},
    // stepping down multiplies by q^{n-1} / z.
    cplx sum = 1.0;  // n = 0
    cplx t = 1.0;
    for (int n = 0; n < cfg.max_terms; ++n) {
        t *= z * std::pow(q, -double(n));
        if (!is_finite(t)) throw overflow_error("theta_q: term overflow");
        sum += t;
        if (std::abs(t) < cfg.theta_tail * (1.0 + std::abs(sum)) && n > std::abs(std::log(std::abs(z))) / std::log(q) + 2)
            break;
        if (n == cfg.max_terms - 1) throw convergence_error("theta_q: positive tail did not converge");
    }
    t = 1.0;
    for (int n = 0; n < cfg.max_terms; ++n) {
        t *= std::pow(q, -double(n + 1)) / z;  // moves from index -n to -(n+1)
        if (!is_finite(t)) throw overflow_error("theta_q: term overflow");
        sum += t;
        if (std::abs(t) < cfg.theta_tail * (1.0 + std::abs(sum)) && n > std::abs(std::log(std::abs(z))) / std::log(q) + 2)
            break;
        if (n == cfg.max_terms - 1) throw convergence_error("theta_q: negative tail did not converge");
    }
    require_finite(sum, "theta_q");
    return sum;
}

}  // namespace mfloq
