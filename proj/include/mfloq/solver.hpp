#pragma once

#include <optional>
#include <string>

#include "mfloq/series.hpp"

namespace mfloq {

struct Tolerances {
    double eps_spec_factor = 1e-9;  // spectrum membership: eps_spec_factor * (1 + ||B||_1)
    double eps_res = 1e-10;         // normalized residual acceptance
};

// The system z d_m y = (zA + B) y with a truncation order and scan depth.
struct ProblemSpec {
    Mat A;
    Mat B;
    MomentSequence seq;
    int N = 20;
    long p_max = 10000;
    Tolerances tol;

    int dim() const { return B.rows(); }
    void validate() const;
};

struct H1Report {
    bool holds = false;
    cplx mu;
    bool mu_ratio_in_spectrum = false;
    Vec eigvec;                    // eigenvector for the eigenvalue ratio(mu), when found
    std::vector<long> resonances;  // p >= 1 with ratio(p+mu) in spec(B)
    long checked_up_to = 0;        // finite check only
    long shift = 0;                // N offset used ((H1)' when > 0)
    bool ratio_left_double_range = false;  // scan stopped where |ratio| overflowed
};

struct H2Report {
    bool holds = false;  // a finite bound was computed (no resonant p hit)
    double bound_C = 0.0;
    long checked_up_to = 0;
    bool monotone_tail = false;  // last 100 scanned values non-increasing
    std::vector<long> resonant_p;
    bool ratio_left_double_range = false;
};

struct Coro1Report {
    bool holds = false;  // ||B|| < |ratio(p+mu)| for every scanned p
    double norm_B = 0.0;
    double min_abs_ratio = 0.0;
    double margin = 0.0;
    double sup_ratio_inverse = 0.0;  // sup over p of |m(p+mu-1)/m(p+mu)|
    bool inverse_tail_monotone = false;
    std::string note;
};

struct HypothesisReport {
    H1Report h1;
    std::optional<H2Report> h2;
    std::optional<Coro1Report> coro1;
};

struct Diagnostics {
    std::vector<double> coeff_norms;     // ||s_p||_1
    double geometric_rate_estimate = 0.0;  // (||s_N|| / ||s_{N/2}||)^{2/N}
};

struct FloquetSolution {
    cplx mu;
    GeneralizedSeries series;  // vector coefficients, exponent mu
    Diagnostics diagnostics;
    std::map<std::string, cplx> metadata;
};

// (H1): ratio(mu) in spec(B), ratio(p+mu) off spec(B) for p = 1..p_max.
// Re(mu) >= 1 required; use check_h1_shifted otherwise.
H1Report check_h1(const Mat& B, const MomentSequence& seq, cplx mu, long p_max, double eps_spec_factor = 1e-9);

// (H1)': same with mu replaced by mu + n_offset; Re(mu) + n_offset >= 1.
H1Report check_h1_shifted(const Mat& B, const MomentSequence& seq, cplx mu, long n_offset, long p_max,
                          double eps_spec_factor = 1e-9);

// (H2): sup_p ||(ratio(p+mu) I - B)^{-1}||_1 over the scanned range.
H2Report check_h2(const Mat& B, const MomentSequence& seq, cplx mu, long p_max, double eps_spec_factor = 1e-9);

// Corollary criterion: ||B||_1 < |ratio(p+mu)| for all p, with the inverse
// ratio sequence bounded.
Coro1Report check_coro1(const Mat& B, const MomentSequence& seq, cplx mu, long p_max);

// Floquet coefficients s_p = (ratio(p+mu) I - B)^{-1} A s_{p-1} up to order N.
// s0 must satisfy B s0 = ratio(mu) s0 within tolerance.
FloquetSolution floquet_coefficients(const ProblemSpec& spec, cplx mu, const Vec& s0);

// One solution per (exponent in the region, independent eigenvector) pair that
// passes (H1); the returned leading vectors are linearly independent.
std::vector<FloquetSolution> floquet_basis(const ProblemSpec& spec, const Region& region = Region{});

// Normalized coefficient residual of z d_m y - (zA + B) y over p = 0..N-1.
double residual(const FloquetSolution& y, const ProblemSpec& spec);
double residual_series(const GeneralizedSeries& y, const Mat& A, const Mat& B, const MomentSequence& seq);

// Exponent map of the fractional realization: same coefficients, exponents
// (p+mu)/alpha.
struct FractionalSolution {
    double alpha = 1.0;
    FloquetSolution base;
    std::string system;  // the system this formally solves
};
FractionalSolution fractional_reparam(const FloquetSolution& y, double alpha);
cplx evaluate_fractional(const FractionalSolution& f, cplx z, int component);

// Max over sample points of |d_m y evaluated - Jackson quotient of y|.
double verify_jackson(const GeneralizedSeries& y, double q, const std::vector<cplx>& sample_points);

}  // namespace mfloq
