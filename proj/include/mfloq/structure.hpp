#pragma once

#include <functional>
#include <memory>
#include <variant>

#include "mfloq/solver.hpp"

namespace mfloq {

// ---------------------------------------------------------------------------
// Jordan reduction of the system
// ---------------------------------------------------------------------------

struct ReducedSystem {
    Mat Atilde;  // P^{-1} A P
    JordanDecomposition jd;
};

// Reduce z d_m y = (zA+B) y to z d_m w = (z Atilde + J) w with w = P^{-1} y.
ReducedSystem jordan_reduce_system(const Mat& A, const Mat& B,
                                   const std::optional<JordanDecomposition>& hint = std::nullopt,
                                   double eps_spec_factor = 1e-9);

// ---------------------------------------------------------------------------
// Change of variable y = h(z) ytilde(z), for commuting A, B
// ---------------------------------------------------------------------------

struct ChangeOfVariable {
    cplx lambda;
    GeneralizedSeries h;       // matrix series, nu = 0, h_0 = I
    std::vector<Mat> s_hat;    // shat_0 = I and the displayed products
};

ChangeOfVariable change_of_variable(const Mat& A, const Mat& B, const MomentSequence& seq, cplx mu, cplx lambda,
                                    int N, long p_max = 10000, double eps_spec_factor = 1e-9);

// ---------------------------------------------------------------------------
// q-side H-functions
// ---------------------------------------------------------------------------

// H_p(z) = z^mu * (polynomial in L(z)), L(z) = log(z)/log(q) taken with the
// branch cut on [0, inf) so that L(qz) = L(z) + 1 off the positive real axis.
struct QHFunction {
    long mu = 1;
    double q = 2.0;
    std::vector<cplx> poly_L;  // coefficients of L^k
    cplx eval(cplx z) const;
};

struct QHFamily {
    double q = 2.0;
    long mu = 1;
    cplx eigenvalue;  // ratio eigenvalue [mu]_q
    cplx c;           // 1 + (q-1) eigenvalue = q^mu
    std::vector<QHFunction> h;  // h[p] is H_{p+1}; h[0] = z^mu
};

// H_1 = z^mu and the chain z d_m H_{p+1} = e H_{p+1} + H_p for the q-factorial
// sequence, mu a positive integer, K functions past H_1. The multiplicative
// factor M(z) = Theta_q(z)/Theta_q(z/c) degenerates to a monomial here
// (c = q^mu sits on the q-spiral of z^mu), so the additive remainder is solved
// exactly in the q-logarithm instead of by telescoping, which cannot converge
// at this resonance.
QHFamily q_H_functions(double q, long mu, int K);

// Theta quotient solving y(qz) = c y(z); pole_proximity near theta zeros.
cplx theta_quotient(double q, cplx c, cplx z);

// Telescoped solution of u(qz) = u(z) + R(z): the sum -sum_{k>=0} R(q^k z)
// (toward infinity) or sum_{k>=1} R(q^{-k} z) (toward zero). Throws
// telescope_divergence when terms fail to decay within max_steps.
cplx solve_additive_telescoping(double q, const std::function<cplx(cplx)>& R, cplx z, bool toward_infinity,
                                int max_steps = 10000, double term_tol = 1e-14);

// ---------------------------------------------------------------------------
// Classical H-functions and the symbolic solution matrix
// ---------------------------------------------------------------------------

// z^mu log^p(z) / p!; p = 0 gives the plain power z^mu.
LogPowerSolution classical_H(int p, cplx mu);

struct MonomialColumn {
    Vec s0;
    cplx mu;
};
struct LogPowerColumn {
    std::vector<LogPowerSolution> comp;
};
struct QThetaColumn {
    double q = 2.0;
    cplx mu;          // exponent of the block
    cplx c;           // multiplicative constant of the H chain
    std::shared_ptr<const QHFamily> family;
    // comp[i]: weighted H-indices making up component i (index into family->h).
    std::vector<std::vector<std::pair<cplx, int>>> comp;
};

using SolutionColumn = std::variant<MonomialColumn, LogPowerColumn, QThetaColumn>;

struct SymbolicSolutionMatrix {
    int n = 0;
    std::vector<SolutionColumn> columns;
    std::optional<JordanDecomposition> jordan_data;
    double verification_residual = 0.0;
    std::string verification_kind;  // "symbolic", "coefficient", or "q-spiral"
};

Vec evaluate_column(const SolutionColumn& col, cplx z);

// Generalized matrix power for diagonalizable B: columns s_{0,j} z^{mu_j}.
SymbolicSolutionMatrix zmb_diagonalizable(const Mat& B, const MomentSequence& seq, const Region& region = Region{},
                                          long p_max = 10000, double eps_spec_factor = 1e-9);

// General construction over the Jordan form; H-chains from the classical
// provider (factorial) or the q provider (q-factorial).
SymbolicSolutionMatrix zmb_general(const Mat& B, const MomentSequence& seq, const Region& region = Region{},
                                   long p_max = 10000, double eps_spec_factor = 1e-9,
                                   const std::optional<JordanDecomposition>& hint = std::nullopt);

// ---------------------------------------------------------------------------
// Planar systems
// ---------------------------------------------------------------------------

struct ClosedFormCheck {
    bool applicable = false;   // det(A) = 0, so the product formulas apply
    double max_rel_dev = 0.0;  // closed forms vs recursion over the truncation
};

struct PlanarDiagonalResult {
    FloquetSolution first;   // exponent mu1, leading vector e1
    FloquetSolution second;  // exponent mu2, leading vector e2
    Mat B;
    ClosedFormCheck check_first, check_second;
};

// B = diag(ratio(mu1), ratio(mu2)). Closed-form coefficients are cross-checked
// against the recursion whenever det(A) = 0.
PlanarDiagonalResult planar_diagonal(const Mat& A, const MomentSequence& seq, cplx mu1, cplx mu2, int N,
                                     long p_max = 10000, double eps_spec_factor = 1e-9);

// Descriptor of the scalar factor H~ multiplying the second series: log(z) for
// the classical sequence, the q-logarithm chain for q-factorials.
struct HTildeClassical {
    LogPowerSolution value;  // log z (exponent 0)
};
struct HTildeQ {
    std::shared_ptr<const QHFamily> family;  // H~ = H_2 / z^mu
};
using HTilde = std::variant<std::monostate, HTildeClassical, HTildeQ>;

struct PlanarJordanResult {
    FloquetSolution first;       // exponent mu, leading vector e1
    GeneralizedSeries second_plain;  // sum s_{p,1} z^{p+mu}, s_{0,1} = e2
    GeneralizedSeries second_h;      // sum s_{p,2} z^{p+mu}, s_{0,2} = e1
    HTilde htilde;
    Mat B;
    ClosedFormCheck check;
};

// B = [[m1, 1], [0, m1]] with m1 = ratio(mu). The second solution is
// second_plain + Htilde * second_h.
PlanarJordanResult planar_jordan(const Mat& A, const MomentSequence& seq, cplx mu, int N, long p_max = 10000,
                                 double eps_spec_factor = 1e-9);

// Coefficientwise residual of the planar-Jordan second solution.
double planar_jordan_second_residual(const PlanarJordanResult& r, const Mat& A, const MomentSequence& seq);

// Numeric value of the second solution; needs an H-function provider
// (throws h3_unavailable when the record carries Htilde abstractly).
Vec evaluate_planar_second(const PlanarJordanResult& r, cplx z);

// Closed-form coefficient families (det(A) = 0 product formulas).
std::vector<std::pair<cplx, cplx>> planar_diagonal_closed(cplx a, cplx b, cplx c, cplx d, const MomentSequence& seq,
                                                          cplx mu1, cplx mu2, int N);
std::vector<std::pair<cplx, cplx>> planar_jordan_closed(cplx a, cplx b, cplx c, cplx d, const MomentSequence& seq,
                                                        cplx mu, int N);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// Exact symbolic check z (column)' = B (column) on log-power terms; returns the
// normalized max coefficient deviation (classical sequence only).
double verify_zmb_symbolic(const SymbolicSolutionMatrix& sm, const Mat& B);

// Numeric check of z D_q (column) = B (column) on a q-spiral sample.
double verify_zmb_q_spiral(const SymbolicSolutionMatrix& sm, const Mat& B, double q, int samples = 24);

}  // namespace mfloq
