#pragma once

#include <map>
#include <vector>

#include "mfloq/mat.hpp"
#include "mfloq/moments.hpp"

namespace mfloq {

// Truncated generalized power series  sum_{p=0..N} c_p z^{p+nu}  with scalar,
// vector or matrix coefficients (one shape per series). The truncation order N
// is explicit data: every operation records the valid order of its output.
class GeneralizedSeries {
  public:
    GeneralizedSeries() = default;
    GeneralizedSeries(cplx nu, std::vector<Mat> coeffs);

    static GeneralizedSeries monomial(cplx nu, const Mat& c0, int order);
    static GeneralizedSeries scalar_monomial(cplx nu, int order);  // z^nu padded with zeros

    cplx nu() const { return nu_; }
    int order() const { return static_cast<int>(c_.size()) - 1; }
    int coeff_rows() const { return c_.empty() ? 0 : c_[0].rows(); }
    int coeff_cols() const { return c_.empty() ? 0 : c_[0].cols(); }
    const Mat& coeff(int p) const { return c_[static_cast<size_t>(p)]; }
    const std::vector<Mat>& coeffs() const { return c_; }

    GeneralizedSeries truncated(int order) const;
    // Rewrites the series with exponent offset new_nu = nu - k (integer k >= 0),
    // prepending zero coefficients.
    GeneralizedSeries realigned(cplx new_nu) const;

  private:
    cplx nu_ = 0.0;
    std::vector<Mat> c_;
};

GeneralizedSeries add(const GeneralizedSeries& a, const GeneralizedSeries& b);
GeneralizedSeries scale(cplx s, const GeneralizedSeries& a);

// d_m per the exponent-lowering rule: coefficients a_p ratio(p+nu), exponent
// nu - 1. Valid for Re(nu) >= 1 or nu a nonnegative integer (where the plain
// power-series rule applies after re-expansion).
GeneralizedSeries moment_derivative(const GeneralizedSeries& f, const MomentSequence& seq);

// For integer nu >= 1: check that the shift-into-C[[z]] path and the direct
// exponent rule agree coefficientwise to 1e-12 relative.
bool integer_nu_consistency(const GeneralizedSeries& f, const MomentSequence& seq);

// Cauchy product of a matrix series h (nu = 0) with y; truncation min(N_h, N_y).
GeneralizedSeries cauchy_product(const GeneralizedSeries& h, const GeneralizedSeries& y);

// Principal-branch numeric value of the truncated series; z off (-inf, 0].
Mat evaluate(const GeneralizedSeries& f, cplx z);

// Finite sum over k of c_k(z) z^mu log^k(z), with polynomial coefficients
// c_k(z) = sum_j terms[k][j] z^j. The top log power has a nonzero coefficient.
class LogPowerSolution {
  public:
    LogPowerSolution() = default;
    LogPowerSolution(cplx mu, std::vector<std::vector<cplx>> terms);

    static LogPowerSolution power(cplx mu);  // plain z^mu

    cplx mu() const { return mu_; }
    int max_log_power() const { return static_cast<int>(terms_.size()) - 1; }
    const std::vector<std::vector<cplx>>& terms() const { return terms_; }
    cplx term(int k, int j) const;
    bool is_zero() const { return terms_.empty(); }

  private:
    void trim();
    cplx mu_ = 0.0;
    std::vector<std::vector<cplx>> terms_;  // terms_[k][j]: coeff of z^{mu+j} log^k z
};

LogPowerSolution add(const LogPowerSolution& a, const LogPowerSolution& b);
LogPowerSolution scale(cplx s, const LogPowerSolution& a);

// Exact symbolic z d/dz on the term structure.
LogPowerSolution classical_derivative_logpower(const LogPowerSolution& f);

cplx evaluate(const LogPowerSolution& f, cplx z);

}  // namespace mfloq
