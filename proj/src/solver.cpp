#include "mfloq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfloq {

void ProblemSpec::validate() const {
    if (!A.is_square() || !B.is_square() || A.rows() != B.rows())
        throw dimension_mismatch("problem: A and B must be square of equal dimension");
    if (N < 1) throw domain_error("problem: truncation order N >= 1 required");
    if (p_max < 1) throw domain_error("problem: p_max >= 1 required");
    if (!A.all_finite() || !B.all_finite()) throw overflow_error("problem: non-finite matrix entries");
}

namespace {

double spec_distance(const SpectralData& sd, cplx v) {
    double d = std::numeric_limits<double>::infinity();
    for (cplx l : sd.eigenvalues) d = std::min(d, std::abs(l - v));
    return d;
}

}  // namespace

H1Report check_h1(const Mat& B, const MomentSequence& seq, cplx mu, long p_max, double eps_spec_factor) {
    if (mu.real() < 1.0 - 1e-12)
        throw domain_error("check_h1: Re(mu) >= 1 required; use check_h1_shifted for smaller exponents");
    H1Report rep;
    rep.mu = mu;
    rep.checked_up_to = p_max;

    const SpectralData sd = eigen(B, eps_spec_factor);
    const double tol = eps_spec_factor * (1.0 + one_norm(B));
    const cplx r0 = ratio(seq, mu);

    rep.mu_ratio_in_spectrum = spec_distance(sd, r0) <= tol;
    if (rep.mu_ratio_in_spectrum) {
        // Attach the eigenvector of the matched eigenvalue.
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < sd.eigenvalues.size(); ++j) {
            const double d = std::abs(sd.eigenvalues[j] - r0);
            if (d < best) {
                best = d;
                rep.eigvec = sd.eigenvectors[j];
            }
        }
    }
    for (long p = 1; p <= p_max; ++p) {
        cplx rp;
        try {
            rp = ratio(seq, mu + double(p));
        } catch (const overflow_error&) {
            // |ratio| exceeded double range: no finite eigenvalue can be hit
            // from here on for a ratio that keeps growing.
            rep.checked_up_to = p - 1;
            rep.ratio_left_double_range = true;
            break;
        }
        if (spec_distance(sd, rp) <= tol) rep.resonances.push_back(p);
    }
    rep.holds = rep.mu_ratio_in_spectrum && rep.resonances.empty();
    return rep;
}

H1Report check_h1_shifted(const Mat& B, const MomentSequence& seq, cplx mu, long n_offset, long p_max,
                          double eps_spec_factor) {
    if (n_offset < 0) throw domain_error("check_h1_shifted: N offset must be nonnegative");
    if (mu.real() + double(n_offset) < 1.0 - 1e-12)
        throw domain_error("check_h1_shifted: Re(mu) + N >= 1 required");
    H1Report rep = check_h1(B, seq, mu + double(n_offset), p_max, eps_spec_factor);
    rep.mu = mu;
    rep.shift = n_offset;
    return rep;
}

H2Report check_h2(const Mat& B, const MomentSequence& seq, cplx mu, long p_max, double eps_spec_factor) {
    H2Report rep;
    rep.checked_up_to = p_max;
    const int n = B.rows();
    double prev = std::numeric_limits<double>::infinity();
    rep.monotone_tail = true;
    const long tail_start = std::max<long>(1, p_max - 99);
    for (long p = 1; p <= p_max; ++p) {
        cplx rp;
        try {
            rp = ratio(seq, mu + double(p));
        } catch (const overflow_error&) {
            rep.checked_up_to = p - 1;
            rep.ratio_left_double_range = true;
            break;  // the inverse norm is ~1/|ratio| -> 0 out here
        }
        Mat m = Mat::identity(n) * rp - B;
        double nrm;
        try {
            nrm = one_norm(inverse(m));
        } catch (const singular_matrix&) {
            rep.resonant_p.push_back(p);
            continue;  // resonance is reported, not thrown
        }
        rep.bound_C = std::max(rep.bound_C, nrm);
        if (p >= tail_start) {
            if (nrm > prev * (1.0 + 1e-12)) rep.monotone_tail = false;
            prev = nrm;
        }
    }
    (void)eps_spec_factor;
    rep.holds = rep.resonant_p.empty();
    return rep;
}

Coro1Report check_coro1(const Mat& B, const MomentSequence& seq, cplx mu, long p_max) {
    Coro1Report rep;
    rep.norm_B = one_norm(B);
    rep.min_abs_ratio = std::numeric_limits<double>::infinity();
    rep.holds = true;
    double prev_inv = std::numeric_limits<double>::infinity();
    rep.inverse_tail_monotone = true;
    const long tail_start = std::max<long>(1, p_max - 99);
    for (long p = 1; p <= p_max; ++p) {
        double a;
        try {
            a = std::abs(ratio(seq, mu + double(p)));
        } catch (const overflow_error&) {
            break;  // |ratio| beyond double range certainly exceeds ||B||
        }
        rep.min_abs_ratio = std::min(rep.min_abs_ratio, a);
        if (!(rep.norm_B < a)) rep.holds = false;
        const double inv = (a == 0.0) ? std::numeric_limits<double>::infinity() : 1.0 / a;
        rep.sup_ratio_inverse = std::max(rep.sup_ratio_inverse, inv);
        if (p >= tail_start) {
            if (inv > prev_inv * (1.0 + 1e-12)) rep.inverse_tail_monotone = false;
            prev_inv = inv;
        }
    }
    rep.margin = rep.min_abs_ratio - rep.norm_B;
    if (rep.inverse_tail_monotone && rep.sup_ratio_inverse >= 0.5 && !rep.holds)
        rep.note =
            "ratio sequence is bounded; ||B|| <= sup_p |m(p+mu)/m(p+mu-1)| is necessary for this criterion";
    return rep;
}

FloquetSolution floquet_coefficients(const ProblemSpec& spec, cplx mu, const Vec& s0) {
    spec.validate();
    const int n = spec.dim();
    if (!s0.is_vector() || s0.rows() != n) throw dimension_mismatch("floquet: s0 has wrong shape");

    const cplx r0 = ratio(spec.seq, mu);
    const double tol = spec.tol.eps_spec_factor * (1.0 + one_norm(spec.B));
    {
        Vec r = spec.B * s0 - s0 * r0;
        if (one_norm(r) > std::max(tol, 1e-12) * std::max(one_norm(s0), 1e-300))
            throw eigvec_residual("floquet: s0 is not an eigenvector for ratio(mu) within tolerance");
    }

    std::vector<Mat> c;
    c.reserve(spec.N + 1);
    c.push_back(s0);
    for (int p = 1; p <= spec.N; ++p) {
        const cplx rp = ratio(spec.seq, mu + double(p));
        Mat m = Mat::identity(n) * rp - spec.B;
        Vec sp;
        try {
            sp = solve(m, spec.A * c.back());
        } catch (const singular_matrix&) {
            throw singular_matrix("floquet: resonance at p = " + std::to_string(p) +
                                  " (ratio(p+mu) in spec(B))");
        }
        if (one_norm(sp) > 1e150)
            throw growth_overflow("floquet: ||s_p|| exceeded 1e150 at p = " + std::to_string(p) +
                                  "; probable divergence");
        c.push_back(std::move(sp));
    }

    FloquetSolution sol;
    sol.mu = mu;
    sol.series = GeneralizedSeries(mu, std::move(c));
    for (int p = 0; p <= spec.N; ++p) sol.diagnostics.coeff_norms.push_back(one_norm(sol.series.coeff(p)));
    const double nN = sol.diagnostics.coeff_norms[spec.N];
    const double nH = sol.diagnostics.coeff_norms[spec.N / 2];
    sol.diagnostics.geometric_rate_estimate =
        (nN > 0.0 && nH > 0.0 && spec.N > 0) ? std::pow(nN / nH, 2.0 / double(spec.N)) : 0.0;
    return sol;
}

std::vector<FloquetSolution> floquet_basis(const ProblemSpec& spec, const Region& region) {
    spec.validate();
    const int n = spec.dim();
    const double tol = spec.tol.eps_spec_factor * (1.0 + one_norm(spec.B));
    const SpectralData sd = eigen(spec.B, spec.tol.eps_spec_factor);
    const auto distinct = distinct_eigenvalues(sd, 10.0 * tol);

    std::vector<FloquetSolution> out;
    std::vector<Vec> ortho;  // orthonormal basis of the accepted leading vectors

    auto project_out = [&](Vec w) {
        for (const Vec& u : ortho) {
            cplx ip = 0.0;
            for (int i = 0; i < n; ++i) ip += std::conj(u[i]) * w[i];
            for (int i = 0; i < n; ++i) w[i] -= ip * u[i];
        }
        return w;
    };
    auto rank_grows = [&](const Vec& v) {
        return one_norm(project_out(v)) > 1e-9 * std::max(one_norm(v), 1e-300);
    };
    auto accept_leading = [&](const Vec& v) {
        Vec w = project_out(v);
        double n2 = 0.0;
        for (int i = 0; i < n; ++i) n2 += std::norm(w[i]);
        if (n2 > 0.0) {
            w *= cplx(1.0 / std::sqrt(n2));
            ortho.push_back(std::move(w));
        }
    };

    for (const auto& [eigval, mult] : distinct) {
        std::vector<cplx> mus;
        try {
            mus = solve_ratio_equation(spec.seq, eigval, region);
        } catch (const convergence_error&) {
            continue;  // unresolved candidates near this eigenvalue: skip it
        }
        for (cplx mu : mus) {
            H1Report h1 = check_h1(spec.B, spec.seq, mu, spec.p_max, spec.tol.eps_spec_factor);
            if (!h1.holds) continue;
            // One solution per independent eigenvector of this eigenvalue.
            for (size_t j = 0; j < sd.eigenvalues.size(); ++j) {
                if (std::abs(sd.eigenvalues[j] - eigval) > 10.0 * tol) continue;
                const Vec& v = sd.eigenvectors[j];
                Vec r = spec.B * v - v * ratio(spec.seq, mu);
                if (one_norm(r) > std::max(tol, 1e-10) * one_norm(v)) continue;
                if (!rank_grows(v)) continue;
                try {
                    out.push_back(floquet_coefficients(spec, mu, v));
                    accept_leading(v);
                } catch (const error&) {
                    // growth overflow or late resonance: drop this branch
                }
            }
        }
    }
    return out;
}

double residual_series(const GeneralizedSeries& y, const Mat& A, const Mat& B, const MomentSequence& seq) {
    const cplx mu = y.nu();
    const int N = y.order();
    double scale = 0.0;
    for (int p = 0; p <= N; ++p) scale = std::max(scale, one_norm(y.coeff(p)));
    if (scale == 0.0) return 0.0;
    const double denom = (1.0 + one_norm(A) + one_norm(B)) * scale;
    double worst = 0.0;
    const int top = std::max(N - 1, 0);
    for (int p = 0; p <= top; ++p) {
        // coefficient of z^{p+mu}: ratio(p+mu) s_p - B s_p - A s_{p-1}
        Mat r = y.coeff(p) * ratio(seq, mu + double(p)) - B * y.coeff(p);
        if (p >= 1) r -= A * y.coeff(p - 1);
        worst = std::max(worst, one_norm(r));
    }
    return worst / denom;
}

double residual(const FloquetSolution& y, const ProblemSpec& spec) {
    return residual_series(y.series, spec.A, spec.B, spec.seq);
}

FractionalSolution fractional_reparam(const FloquetSolution& y, double alpha) {
    if (!(alpha > 0.0)) throw domain_error("fractional_reparam: alpha > 0 required");
    FractionalSolution f;
    f.alpha = alpha;
    f.base = y;
    f.system = "z^{1/alpha} D^{1/alpha} y = (z^{1/alpha} A + B) y, alpha = " + std::to_string(alpha);
    return f;
}

cplx evaluate_fractional(const FractionalSolution& f, cplx z, int component) {
    if (on_negative_cut(z)) throw branch_cut_error("evaluate_fractional: z on the branch cut");
    const GeneralizedSeries& s = f.base.series;
    if (component < 0 || component >= s.coeff_rows()) throw dimension_mismatch("evaluate_fractional: component");
    cplx acc = 0.0;
    for (int p = 0; p <= s.order(); ++p)
        acc += s.coeff(p)(component, 0) * principal_power(z, (double(p) + f.base.mu) / f.alpha);
    return acc;
}

double verify_jackson(const GeneralizedSeries& y, double q, const std::vector<cplx>& sample_points) {
    if (!(q > 1.0)) throw domain_error("verify_jackson: q > 1 required");
    const MomentSequence seq = MomentSequence::q_factorial(q);
    const GeneralizedSeries dy = moment_derivative(y, seq);
    double worst = 0.0;
    for (cplx z : sample_points) {
        if (z == cplx(0.0)) throw domain_error("verify_jackson: z = 0 sample");
        const Mat lhs = evaluate(dy, z);
        const Mat quotient = (evaluate(y, q * z) - evaluate(y, z)) * (1.0 / ((q - 1.0) * z));
        worst = std::max(worst, one_norm(lhs - quotient));
    }
    return worst;
}

}  // namespace mfloq
