#include "mfloq/structure.hpp"

#include <algorithm>
#include <cmath>

#include "mfloq/special.hpp"

namespace mfloq {

// ---------------------------------------------------------------------------
// Jordan reduction
// ---------------------------------------------------------------------------

ReducedSystem jordan_reduce_system(const Mat& A, const Mat& B, const std::optional<JordanDecomposition>& hint,
                                   double eps_spec_factor) {
    if (!A.is_square() || A.rows() != B.rows()) throw dimension_mismatch("jordan_reduce_system: shape mismatch");
    ReducedSystem rs;
    rs.jd = jordan(B, hint, eps_spec_factor);
    const Mat Pinv = inverse(rs.jd.P);
    rs.Atilde = Pinv * A * rs.jd.P;
    const cplx dA = det(A), dAt = det(rs.Atilde);
    if (std::abs(dA - dAt) > 1e-9 * (1.0 + std::abs(dA)))
        throw ill_conditioned("jordan_reduce_system: det(Atilde) drifted from det(A)");
    return rs;
}

// ---------------------------------------------------------------------------
// Change of variable
// ---------------------------------------------------------------------------

ChangeOfVariable change_of_variable(const Mat& A, const Mat& B, const MomentSequence& seq, cplx mu, cplx lambda,
                                    int N, long p_max, double eps_spec_factor) {
    if (!commute(A, B)) throw non_commuting("change_of_variable: A and B must commute");
    H1Report h1 = check_h1(B, seq, mu, p_max, eps_spec_factor);
    if (!h1.holds)
        throw resonant("change_of_variable: (H1) fails for this (B, sequence, mu); " +
                       std::string(h1.mu_ratio_in_spectrum ? "resonant p found" : "ratio(mu) not an eigenvalue"));

    const int n = A.rows();
    const cplx r_mu = ratio(seq, mu);
    const Mat AmL = A - Mat::identity(n) * lambda;

    std::vector<Mat> s_hat;
    s_hat.push_back(Mat::identity(n));
    std::vector<cplx> r_at;  // r_at[k] = ratio(k + mu)
    r_at.push_back(r_mu);
    for (int k = 1; k <= N; ++k) {
        r_at.push_back(ratio(seq, mu + double(k)));
        Mat m = Mat::identity(n) * r_at[k] - B;
        s_hat.push_back(solve(m, AmL * s_hat[k - 1]));
    }

    std::vector<Mat> h;
    h.push_back(Mat::identity(n));
    for (int p = 1; p <= N; ++p) {
        Mat acc(n, n);
        for (int j = 0; j <= p - 1; ++j) {
            Mat term = s_hat[p - j - 1] * lambda - s_hat[p - j] * (r_at[p] - r_at[p - j]);
            acc += h[j] * term;
        }
        const cplx denom = r_at[p] - r_mu;
        h.push_back(acc * (1.0 / denom));
    }

    ChangeOfVariable cov;
    cov.lambda = lambda;
    cov.h = GeneralizedSeries(0.0, std::move(h));
    cov.s_hat = std::move(s_hat);
    return cov;
}

// ---------------------------------------------------------------------------
// Classical and q H-functions
// ---------------------------------------------------------------------------

LogPowerSolution classical_H(int p, cplx mu) {
    if (p < 0) throw domain_error("classical_H: p >= 0 required");
    double fact = 1.0;
    for (int j = 2; j <= p; ++j) fact *= j;
    std::vector<std::vector<cplx>> terms(static_cast<size_t>(p) + 1);
    terms[p] = {cplx(1.0 / fact)};
    return LogPowerSolution(mu, std::move(terms));
}

namespace {

// log with the branch cut on [0, inf): arg in (0, 2pi).
cplx log_positive_cut(cplx z) {
    if (z == cplx(0.0) || (z.imag() == 0.0 && z.real() > 0.0))
        throw branch_cut_error("q H-function: z on the cut [0, inf)");
    cplx l = std::log(z);
    if (l.imag() <= 0.0) l += cplx(0.0, 2.0 * M_PI);
    return l;
}

}  // namespace

cplx QHFunction::eval(cplx z) const {
    const cplx L = log_positive_cut(z) / std::log(q);
    cplx poly = 0.0;
    for (size_t k = poly_L.size(); k-- > 0;) poly = poly * L + poly_L[k];
    return poly * principal_power(z, cplx(double(mu)));
}

QHFamily q_H_functions(double q, long mu, int K) {
    if (!(q > 1.0)) throw domain_error("q_H_functions: q > 1 required");
    if (mu < 1) throw domain_error("q_H_functions: mu must be a positive integer");
    if (K < 0) throw domain_error("q_H_functions: K >= 0 required");

    QHFamily fam;
    fam.q = q;
    fam.mu = mu;
    fam.eigenvalue = q_bracket(q, cplx(double(mu) + 1.0));            // [mu]_q
    fam.c = 1.0 + (q - 1.0) * fam.eigenvalue;                        // = q^mu
    const cplx kappa = (q - 1.0) * std::pow(q, -double(mu));

    // H_{p+1} = z^mu kappa^p L(L-1)...(L-p+1)/p!  (Newton antidifferences of
    // the constant forcing; the L-polynomials satisfy P(x+1)-P(x) = kappa P_prev).
    std::vector<cplx> poly{cplx(1.0)};
    for (int p = 0; p <= K; ++p) {
        QHFunction h;
        h.mu = mu;
        h.q = q;
        h.poly_L = poly;
        fam.h.push_back(std::move(h));
        // next: poly <- poly * kappa (x - p) / (p+1)
        std::vector<cplx> next(poly.size() + 1, 0.0);
        for (size_t k = 0; k < poly.size(); ++k) {
            next[k + 1] += poly[k];
            next[k] -= poly[k] * double(p);
        }
        for (cplx& c : next) c *= kappa / double(p + 1);
        poly = std::move(next);
    }
    return fam;
}

cplx theta_quotient(double q, cplx c, cplx z) {
    if (c == cplx(0.0) || c == cplx(1.0)) throw domain_error("theta_quotient: c outside C \\ {0,1}");
    const cplx num = theta_q(q, z);
    const cplx den = theta_q(q, z / c);
    // Crude magnitude scale: theta at the positive modulus dominates.
    const double scale = std::abs(theta_q(q, cplx(std::abs(z / c))));
    if (std::abs(den) < 1e-12 * (1.0 + scale))
        throw pole_proximity("theta_quotient: z/c too close to a theta zero");
    return num / den;
}

cplx solve_additive_telescoping(double q, const std::function<cplx(cplx)>& R, cplx z, bool toward_infinity,
                                int max_steps, double term_tol) {
    if (!(q > 1.0)) throw domain_error("telescoping: q > 1 required");
    cplx acc = 0.0;
    double peak = 0.0;
    int quiet = 0;
    double prev = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int k = 0; k < max_steps; ++k) {
        const cplx w = toward_infinity ? z * std::pow(q, double(k)) : z * std::pow(q, -double(k + 1));
        const cplx t = R(w);
        const double a = std::abs(t);
        if (!std::isfinite(a) || a > 1e120)
            throw telescope_divergence("telescoping: terms blew up at step " + std::to_string(k));
        acc += toward_infinity ? -t : t;
        peak = std::max(peak, a);
        if (a < term_tol * (1.0 + peak)) {
            if (++quiet >= 3) return acc;
        } else {
            quiet = 0;
        }
        growing = (a >= prev * 0.999) ? growing + 1 : 0;
        if (growing > 200)
            throw telescope_divergence("telescoping: terms fail to decay (resonant or divergent direction)");
        prev = a;
    }
    throw telescope_divergence("telescoping: no decay within step limit");
}

// ---------------------------------------------------------------------------
// z_m^B
// ---------------------------------------------------------------------------

Vec evaluate_column(const SolutionColumn& col, cplx z) {
    if (std::holds_alternative<MonomialColumn>(col)) {
        const auto& m = std::get<MonomialColumn>(col);
        Vec v = m.s0;
        v *= principal_power(z, m.mu);
        return v;
    }
    if (std::holds_alternative<LogPowerColumn>(col)) {
        const auto& c = std::get<LogPowerColumn>(col);
        Vec v(static_cast<int>(c.comp.size()), 1);
        for (size_t i = 0; i < c.comp.size(); ++i) v[static_cast<int>(i)] = evaluate(c.comp[i], z);
        return v;
    }
    const auto& qc = std::get<QThetaColumn>(col);
    Vec v(static_cast<int>(qc.comp.size()), 1);
    for (size_t i = 0; i < qc.comp.size(); ++i) {
        cplx acc = 0.0;
        for (const auto& [w, idx] : qc.comp[i]) acc += w * qc.family->h[static_cast<size_t>(idx)].eval(z);
        v[static_cast<int>(i)] = acc;
    }
    return v;
}

namespace {

cplx pick_exponent(const MomentSequence& seq, cplx eigval, const Region& region) {
    // Classical identity ratio(mu) = mu: the exponent is the eigenvalue itself,
    // exactly, which keeps the symbolic verification an exact identity.
    if (seq.kind() == SeqKind::Factorial && eigval.real() >= 1.0 && region.contains(eigval)) return eigval;
    const std::vector<cplx> roots = solve_ratio_equation(seq, eigval, region);
    if (roots.empty())
        throw no_exponent_found("zmb: no exponent mu in the search region with ratio(mu) = eigenvalue (" +
                                std::to_string(eigval.real()) + (eigval.imag() < 0 ? " - " : " + ") +
                                std::to_string(std::abs(eigval.imag())) + "i)");
    return roots.front();
}

}  // namespace

SymbolicSolutionMatrix zmb_diagonalizable(const Mat& B, const MomentSequence& seq, const Region& region, long p_max,
                                          double eps_spec_factor) {
    if (!B.is_square()) throw dimension_mismatch("zmb: B must be square");
    JordanDecomposition jd = jordan(B, std::nullopt, eps_spec_factor);
    for (int s : jd.block_sizes)
        if (s != 1) throw domain_error("zmb_diagonalizable: B is not diagonalizable; use zmb_general");

    const int n = B.rows();
    SymbolicSolutionMatrix sm;
    sm.n = n;
    sm.jordan_data = jd;
    for (int j = 0; j < n; ++j) {
        const cplx eigval = jd.J(j, j);
        const cplx mu = pick_exponent(seq, eigval, region);
        H1Report h1 = check_h1(B, seq, mu, p_max, eps_spec_factor);
        if (!h1.holds) {
            if (!h1.resonances.empty())
                throw resonant("zmb: ratio(p+mu) re-enters spec(B) at p = " + std::to_string(h1.resonances.front()));
            throw resonant("zmb: ratio(mu) failed the spectrum membership check");
        }
        MonomialColumn col;
        col.mu = mu;
        col.s0 = Vec(n, 1);
        for (int i = 0; i < n; ++i) col.s0[i] = jd.P(i, j);
        sm.columns.push_back(col);
    }
    // Coefficient residual of each one-term column for the A = 0 system.
    double worst = 0.0;
    for (const auto& col : sm.columns) {
        const auto& m = std::get<MonomialColumn>(col);
        GeneralizedSeries s(m.mu, {m.s0});
        worst = std::max(worst, residual_series(s, Mat(n, n), B, seq));
    }
    sm.verification_residual = worst;
    sm.verification_kind = "coefficient";
    return sm;
}

namespace {

struct BlockColumns {
    // Per column of the block: component entries indexed from the block top.
    // entry (i, h_idx): component i of the block carries H_{h_idx} (1-based).
    std::vector<std::vector<int>> h_index_by_row;  // [col][row within block]
};

BlockColumns block_layout(int nk) {
    // Column i (1-based) stacks H_i, H_{i-1}, ..., H_1 from the block top row
    // downward... the theorem's proof lists C_i = (H_i, H_{i-1}, ..., H_1, 0, .., 0)^T
    // with H_1 = z^mu in row i-1 of the block.
    BlockColumns bc;
    for (int i = 1; i <= nk; ++i) {
        std::vector<int> rows(nk, 0);  // 0 = zero entry
        for (int r = 0; r < i; ++r) rows[r] = i - r;
        bc.h_index_by_row.push_back(std::move(rows));
    }
    return bc;
}

}  // namespace

SymbolicSolutionMatrix zmb_general(const Mat& B, const MomentSequence& seq, const Region& region, long p_max,
                                   double eps_spec_factor, const std::optional<JordanDecomposition>& hint) {
    if (!B.is_square()) throw dimension_mismatch("zmb: B must be square");
    const int n = B.rows();
    JordanDecomposition jd = jordan(B, hint, eps_spec_factor);

    bool diagonalizable = true;
    for (int s : jd.block_sizes) diagonalizable = diagonalizable && s == 1;
    if (diagonalizable) return zmb_diagonalizable(B, seq, region, p_max, eps_spec_factor);

    // Exponents per block, then the cross-block non-resonance condition.
    const size_t nblocks = jd.block_sizes.size();
    std::vector<cplx> mu_t(nblocks);
    for (size_t k = 0; k < nblocks; ++k) mu_t[k] = pick_exponent(seq, jd.block_eigenvalues[k], region);
    const double tol = eps_spec_factor * (1.0 + one_norm(B));
    for (size_t k1 = 0; k1 < nblocks; ++k1)
        for (size_t k2 = 0; k2 < nblocks; ++k2) {
            if (k1 == k2) continue;
            for (long p = 1; p <= p_max; ++p) {
                cplx rp;
                try {
                    rp = ratio(seq, mu_t[k2] + double(p));
                } catch (const overflow_error&) {
                    break;
                }
                if (std::abs(jd.block_eigenvalues[k1] - rp) <= tol)
                    throw resonant("zmb_general: cross-block resonance between blocks " + std::to_string(k1) +
                                   " and " + std::to_string(k2) + " at p = " + std::to_string(p));
            }
        }

    SymbolicSolutionMatrix sm;
    sm.n = n;
    sm.jordan_data = jd;

    int offset = 0;
    for (size_t k = 0; k < nblocks; ++k) {
        const int nk = jd.block_sizes[k];
        if (nk == 1) {
            MonomialColumn col;
            col.mu = mu_t[k];
            col.s0 = Vec(n, 1);
            for (int i = 0; i < n; ++i) col.s0[i] = jd.P(i, offset);
            sm.columns.push_back(col);
            offset += 1;
            continue;
        }
        const BlockColumns layout = block_layout(nk);
        if (seq.kind() == SeqKind::Factorial) {
            // H_j = z^mu log^{j-1}(z) / (j-1)!
            std::vector<LogPowerSolution> H;
            for (int j = 1; j <= nk; ++j) H.push_back(classical_H(j - 1, mu_t[k]));
            for (int ci = 0; ci < nk; ++ci) {
                LogPowerColumn col;
                col.comp.assign(n, LogPowerSolution());
                // block column in J coordinates, then transformed by P
                for (int i = 0; i < n; ++i) {
                    LogPowerSolution acc;
                    for (int r = 0; r < nk; ++r) {
                        const int hidx = layout.h_index_by_row[ci][r];
                        if (hidx == 0) continue;
                        const cplx w = jd.P(i, offset + r);
                        if (w == cplx(0.0)) continue;
                        acc = add(acc, scale(w, H[hidx - 1]));
                    }
                    col.comp[i] = acc;
                }
                sm.columns.push_back(col);
            }
        } else if (seq.kind() == SeqKind::QFactorial) {
            const cplx mu = mu_t[k];
            if (std::abs(mu.imag()) > 1e-9 || !near_integer(mu.real(), 1e-9) || mu.real() < 0.5)
                throw h3_unavailable("zmb_general: the q H-chain needs a positive integer exponent; got Re(mu) = " +
                                     std::to_string(mu.real()));
            auto fam = std::make_shared<QHFamily>(q_H_functions(seq.q(), std::lround(mu.real()), nk - 1));
            for (int ci = 0; ci < nk; ++ci) {
                QThetaColumn col;
                col.q = seq.q();
                col.mu = mu;
                col.c = fam->c;
                col.family = fam;
                col.comp.assign(n, {});
                for (int i = 0; i < n; ++i)
                    for (int r = 0; r < nk; ++r) {
                        const int hidx = layout.h_index_by_row[ci][r];
                        if (hidx == 0) continue;
                        const cplx w = jd.P(i, offset + r);
                        if (w != cplx(0.0)) col.comp[i].emplace_back(w, hidx - 1);
                    }
                sm.columns.push_back(col);
            }
        } else {
            throw h3_unavailable("zmb_general: no H-function provider for sequence '" + seq.descriptor() + "'");
        }
        offset += nk;
    }

    if (seq.kind() == SeqKind::Factorial) {
        sm.verification_residual = verify_zmb_symbolic(sm, B);
        sm.verification_kind = "symbolic";
    } else if (seq.kind() == SeqKind::QFactorial) {
        sm.verification_residual = verify_zmb_q_spiral(sm, B, seq.q());
        sm.verification_kind = "q-spiral";
    }
    return sm;
}

// ---------------------------------------------------------------------------
// Planar systems
// ---------------------------------------------------------------------------

namespace {

void planar_check_non_resonant(const MomentSequence& seq, std::vector<cplx> mus, long p_max, double tol) {
    // ratio(mu_k) must avoid { ratio(p + mu_j) : p >= 1, j } for every k, j.
    std::vector<cplx> vals;
    for (cplx m : mus) vals.push_back(ratio(seq, m));
    for (cplx v : vals)
        for (cplx m : mus)
            for (long p = 1; p <= p_max; ++p) {
                cplx rp;
                try {
                    rp = ratio(seq, m + double(p));
                } catch (const overflow_error&) {
                    break;  // ratio grew out of double range; no further hits possible
                }
                if (std::abs(v - rp) <= tol)
                    throw resonant("planar: ratio(mu) recurs at shift p = " + std::to_string(p));
            }
}

double closed_vs_recursion(const std::vector<std::pair<cplx, cplx>>& closed, const GeneralizedSeries& s) {
    double worst = 0.0;
    for (int p = 0; p <= s.order() && p < static_cast<int>(closed.size()); ++p) {
        const cplx f = s.coeff(p)(0, 0), g = s.coeff(p)(1, 0);
        const double scale = std::max({std::abs(f), std::abs(g), 1e-300});
        worst = std::max(worst, std::abs(f - closed[p].first) / scale);
        worst = std::max(worst, std::abs(g - closed[p].second) / scale);
    }
    return worst;
}

bool det_vanishes(const Mat& A) {
    return std::abs(det(A)) <= 1e-12 * (1.0 + one_norm(A) * one_norm(A));
}

}  // namespace

std::vector<std::pair<cplx, cplx>> planar_diagonal_closed(cplx a, cplx, cplx c, cplx d, const MomentSequence& seq,
                                                          cplx mu1, cplx mu2, int N) {
    const cplx lambda = a + d;
    const cplx beta = ratio(seq, mu1) - ratio(seq, mu2);
    std::vector<cplx> D{cplx(0.0)};  // D[i] = ratio(mu1 + i) - ratio(mu1); D[0] = 0
    for (int i = 1; i <= N; ++i) D.push_back(ratio(seq, mu1 + double(i)) - ratio(seq, mu1));

    std::vector<std::pair<cplx, cplx>> out;
    out.emplace_back(1.0, 0.0);
    if (N >= 1) out.emplace_back(a / D[1], c / (D[1] + beta));
    for (int p = 2; p <= N; ++p) {
        cplx fp, gp;
        if (lambda != cplx(0.0)) {
            const cplx alpha = a * beta / lambda;
            cplx num_f = 1.0, den_f = 1.0;
            for (int i = 0; i <= p - 1; ++i) num_f *= D[i] + alpha;
            for (int i = 1; i <= p; ++i) den_f *= D[i];
            for (int i = 0; i <= p - 1; ++i) den_f *= D[i] + beta;
            fp = std::pow(lambda, double(p)) * num_f / den_f;
            cplx num_g = 1.0, den_g = 1.0;
            for (int i = 1; i <= p - 1; ++i) num_g *= D[i] + alpha;
            for (int i = 1; i <= p - 1; ++i) den_g *= D[i];
            for (int i = 1; i <= p; ++i) den_g *= D[i] + beta;
            gp = c * std::pow(lambda, double(p - 1)) * num_g / den_g;
        } else {
            cplx den_f = 1.0;
            for (int i = 1; i <= p; ++i) den_f *= D[i];
            for (int i = 1; i <= p - 1; ++i) den_f *= D[i] + beta;
            fp = std::pow(a, double(p)) * std::pow(beta, double(p - 1)) / den_f;
            cplx den_g = 1.0;
            for (int i = 1; i <= p - 1; ++i) den_g *= D[i];
            for (int i = 1; i <= p; ++i) den_g *= D[i] + beta;
            gp = c * std::pow(a, double(p - 1)) * std::pow(beta, double(p - 1)) / den_g;
        }
        out.emplace_back(fp, gp);
    }
    return out;
}

std::vector<std::pair<cplx, cplx>> planar_jordan_closed(cplx a, cplx, cplx c, cplx d, const MomentSequence& seq,
                                                        cplx mu, int N) {
    // Product form for det(A) = 0, seeded consistently with the recursion:
    //   f_p = (a + c/D_p)/D_p * prod_{i=1}^{p-1} (lambda + c/D_i)/D_i
    //   g_p = (c/D_p)       * prod_{i=1}^{p-1} (lambda + c/D_i)/D_i
    const cplx lambda = a + d;
    const cplx m1 = ratio(seq, mu);
    std::vector<cplx> D{cplx(0.0)};
    for (int i = 1; i <= N; ++i) D.push_back(ratio(seq, mu + double(i)) - m1);

    std::vector<std::pair<cplx, cplx>> out;
    out.emplace_back(1.0, 0.0);
    cplx pref = 1.0;  // prod_{i=1}^{p-1} (lambda + c/D_i)/D_i
    for (int p = 1; p <= N; ++p) {
        out.emplace_back((a + c / D[p]) / D[p] * pref, c / D[p] * pref);
        pref *= (lambda + c / D[p]) / D[p];
    }
    return out;
}

PlanarDiagonalResult planar_diagonal(const Mat& A, const MomentSequence& seq, cplx mu1, cplx mu2, int N, long p_max,
                                     double eps_spec_factor) {
    if (A.rows() != 2 || A.cols() != 2) throw dimension_mismatch("planar_diagonal: A must be 2x2");
    if (mu1.real() < 1.0 - 1e-12 || mu2.real() < 1.0 - 1e-12)
        throw domain_error("planar_diagonal: Re(mu) >= 1 required");
    const cplx r1 = ratio(seq, mu1), r2 = ratio(seq, mu2);
    Mat B(2, 2, {r1, 0.0, 0.0, r2});
    const double tol = eps_spec_factor * (1.0 + one_norm(B));
    planar_check_non_resonant(seq, {mu1, mu2}, p_max, tol);

    ProblemSpec spec{A, B, seq, N, p_max, Tolerances{eps_spec_factor, 1e-10}};
    PlanarDiagonalResult res;
    res.B = B;
    res.first = floquet_coefficients(spec, mu1, Mat::col_vector({1.0, 0.0}));
    res.second = floquet_coefficients(spec, mu2, Mat::col_vector({0.0, 1.0}));

    const cplx a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
    for (const auto& [sol, mk] : {std::pair<FloquetSolution*, int>{&res.first, 1}, {&res.second, 2}}) {
        sol->metadata["a"] = a;
        sol->metadata["b"] = b;
        sol->metadata["c"] = c;
        sol->metadata["d"] = d;
        sol->metadata["lambda"] = a + d;
        sol->metadata["beta"] = (mk == 1) ? r1 - r2 : r2 - r1;
    }
    if (det_vanishes(A)) {
        res.check_first.applicable = true;
        res.check_first.max_rel_dev =
            closed_vs_recursion(planar_diagonal_closed(a, b, c, d, seq, mu1, mu2, N), res.first.series);
        // The mu2 family follows by swapping the roles of the two coordinates.
        auto closed2 = planar_diagonal_closed(d, c, b, a, seq, mu2, mu1, N);
        for (auto& [f, g] : closed2) std::swap(f, g);  // back to (f, g) = (top, bottom)
        res.check_second.applicable = true;
        res.check_second.max_rel_dev = closed_vs_recursion(closed2, res.second.series);
    }
    return res;
}

PlanarJordanResult planar_jordan(const Mat& A, const MomentSequence& seq, cplx mu, int N, long p_max,
                                 double eps_spec_factor) {
    if (A.rows() != 2 || A.cols() != 2) throw dimension_mismatch("planar_jordan: A must be 2x2");
    if (mu.real() < 1.0 - 1e-12) throw domain_error("planar_jordan: Re(mu) >= 1 required");
    const cplx m1 = ratio(seq, mu);
    Mat B(2, 2, {m1, 1.0, 0.0, m1});
    const double tol = eps_spec_factor * (1.0 + one_norm(B));
    for (long p = 1; p <= p_max; ++p)
        if (std::abs(m1 - ratio(seq, mu + double(p))) <= tol)
            throw resonant("planar_jordan: ratio(mu) recurs at shift p = " + std::to_string(p));

    ProblemSpec spec{A, B, seq, N, p_max, Tolerances{eps_spec_factor, 1e-10}};
    PlanarJordanResult res;
    res.B = B;
    res.first = floquet_coefficients(spec, mu, Mat::col_vector({1.0, 0.0}));
    const cplx a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
    res.first.metadata = {{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"lambda", a + d}};

    // Second solution: sum s_{p,1} z^{p+mu} + Htilde(z) sum s_{p,2} z^{p+mu}.
    std::vector<Mat> s1{Mat::col_vector({0.0, 1.0})};
    std::vector<Mat> s2{Mat::col_vector({1.0, 0.0})};
    for (int p = 1; p <= N; ++p) {
        const cplx rp = ratio(seq, mu + double(p));
        Mat m = Mat::identity(2) * rp - B;
        s2.push_back(solve(m, A * s2[p - 1]));
        s1.push_back(solve(m, A * s1[p - 1] - s2[p]));
    }
    res.second_plain = GeneralizedSeries(mu, std::move(s1));
    res.second_h = GeneralizedSeries(mu, std::move(s2));

    switch (seq.kind()) {
        case SeqKind::Factorial:
            res.htilde = HTildeClassical{LogPowerSolution(0.0, {{}, {cplx(1.0)}})};  // log z
            break;
        case SeqKind::QFactorial: {
            if (std::abs(mu.imag()) > 1e-9 || !near_integer(mu.real(), 1e-9) || mu.real() < 0.5)
                throw h3_unavailable("planar_jordan: q Htilde needs a positive integer mu");
            res.htilde = HTildeQ{std::make_shared<QHFamily>(q_H_functions(seq.q(), std::lround(mu.real()), 1))};
            break;
        }
        default:
            // The coefficient recursions are sequence-generic; without a
            // provider the record carries Htilde abstractly and only numeric
            // evaluation of the second solution is unavailable.
            res.htilde = std::monostate{};
            break;
    }

    if (det_vanishes(A)) {
        res.check.applicable = true;
        res.check.max_rel_dev = closed_vs_recursion(planar_jordan_closed(a, b, c, d, seq, mu, N), res.first.series);
    }
    return res;
}

Vec evaluate_planar_second(const PlanarJordanResult& r, cplx z) {
    cplx ht;
    if (std::holds_alternative<HTildeClassical>(r.htilde)) {
        ht = evaluate(std::get<HTildeClassical>(r.htilde).value, z);
    } else if (std::holds_alternative<HTildeQ>(r.htilde)) {
        const auto& fam = *std::get<HTildeQ>(r.htilde).family;
        ht = fam.h[1].eval(z) / principal_power(z, cplx(double(fam.mu)));
    } else {
        throw h3_unavailable("planar_jordan: no H-function provider; the second solution is symbolic only");
    }
    Vec v = evaluate(r.second_plain, z);
    Vec w = evaluate(r.second_h, z);
    w *= ht;
    return v + w;
}

double planar_jordan_second_residual(const PlanarJordanResult& r, const Mat& A, const MomentSequence& seq) {
    const cplx mu = r.second_plain.nu();
    const Mat& B = r.B;
    const int N = r.second_plain.order();
    double scale = 0.0;
    for (int p = 0; p <= N; ++p)
        scale = std::max({scale, one_norm(r.second_plain.coeff(p)), one_norm(r.second_h.coeff(p))});
    const double denom = (1.0 + one_norm(A) + one_norm(B)) * std::max(scale, 1e-300);
    double worst = 0.0;
    for (int p = 0; p < N; ++p) {
        const cplx rp = ratio(seq, mu + double(p));
        Mat m = Mat::identity(2) * rp - B;
        // H-carrying part obeys the plain recursion; the plain part picks up s_{p,2}.
        Mat res2 = m * r.second_h.coeff(p);
        Mat res1 = m * r.second_plain.coeff(p) + r.second_h.coeff(p);
        if (p >= 1) {
            res2 -= A * r.second_h.coeff(p - 1);
            res1 -= A * r.second_plain.coeff(p - 1);
        } else {
            // p = 0: B s_{0,1} = ratio(mu) s_{0,1} + s_{0,2}, B s_{0,2} = ratio(mu) s_{0,2}.
        }
        worst = std::max({worst, one_norm(res1), one_norm(res2)});
    }
    return worst / denom;
}

// ---------------------------------------------------------------------------
// Verification of symbolic matrices
// ---------------------------------------------------------------------------

namespace {

LogPowerSolution column_component_as_logpower(const SolutionColumn& col, int i) {
    if (std::holds_alternative<MonomialColumn>(col)) {
        const auto& m = std::get<MonomialColumn>(col);
        return m.s0[i] == cplx(0.0) ? LogPowerSolution() : scale(m.s0[i], LogPowerSolution::power(m.mu));
    }
    if (std::holds_alternative<LogPowerColumn>(col)) return std::get<LogPowerColumn>(col).comp[i];
    throw domain_error("symbolic verification: q-theta columns need the q-spiral check");
}

double logpower_max_coeff(const LogPowerSolution& f) {
    double m = 0.0;
    for (const auto& poly : f.terms())
        for (cplx c : poly) m = std::max(m, std::abs(c));
    return m;
}

}  // namespace

double verify_zmb_symbolic(const SymbolicSolutionMatrix& sm, const Mat& B) {
    const int n = sm.n;
    double worst = 0.0;
    for (const auto& col : sm.columns) {
        double col_scale = 0.0;
        std::vector<LogPowerSolution> comp(n);
        for (int i = 0; i < n; ++i) {
            comp[i] = column_component_as_logpower(col, i);
            col_scale = std::max(col_scale, logpower_max_coeff(comp[i]));
        }
        double col_worst = 0.0;
        for (int i = 0; i < n; ++i) {
            LogPowerSolution lhs = classical_derivative_logpower(comp[i]);
            LogPowerSolution rhs;
            for (int j = 0; j < n; ++j) {
                if (B(i, j) == cplx(0.0)) continue;
                rhs = add(rhs, scale(B(i, j), comp[j]));
            }
            LogPowerSolution diff = add(lhs, scale(cplx(-1.0), rhs));
            col_worst = std::max(col_worst, logpower_max_coeff(diff));
        }
        worst = std::max(worst, col_worst / (std::max(col_scale, 1e-300) * (1.0 + one_norm(B))));
    }
    return worst;
}

double verify_zmb_q_spiral(const SymbolicSolutionMatrix& sm, const Mat& B, double q, int samples) {
    double worst = 0.0;
    for (const auto& col : sm.columns) {
        for (int k = 0; k < samples; ++k) {
            // spiral off the positive axis, spanning a decade of moduli
            const double r = 0.2 * std::pow(q, double(k % 8) / 4.0);
            const double th = 0.4 + 5.8 * double(k) / double(samples);
            const cplx z = std::polar(r, th);
            const Vec yz = evaluate_column(col, z);
            const Vec yqz = evaluate_column(col, q * z);
            Vec lhs = yqz - yz;
            lhs *= cplx(1.0 / (q - 1.0));  // z D_q y
            const Vec rhs = B * yz;
            const double scale = std::max({one_norm(yz), one_norm(rhs), 1.0});
            worst = std::max(worst, one_norm(lhs - rhs) / scale);
        }
    }
    return worst;
}

}  // namespace mfloq
