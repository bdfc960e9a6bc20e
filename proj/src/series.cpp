#include "mfloq/series.hpp"

#include <cmath>

namespace mfloq {

GeneralizedSeries::GeneralizedSeries(cplx nu, std::vector<Mat> coeffs) : nu_(nu), c_(std::move(coeffs)) {
    if (c_.empty()) throw dimension_mismatch("series: needs at least the order-0 coefficient");
    const int r = c_[0].rows(), k = c_[0].cols();
    for (const Mat& m : c_) {
        if (m.rows() != r || m.cols() != k) throw dimension_mismatch("series: mixed coefficient shapes");
        if (!m.all_finite()) throw overflow_error("series: non-finite coefficient");
    }
    require_finite(nu_, "series exponent");
}

GeneralizedSeries GeneralizedSeries::monomial(cplx nu, const Mat& c0, int order) {
    std::vector<Mat> c(static_cast<size_t>(order) + 1, Mat(c0.rows(), c0.cols()));
    c[0] = c0;
    return GeneralizedSeries(nu, std::move(c));
}

GeneralizedSeries GeneralizedSeries::scalar_monomial(cplx nu, int order) {
    Mat one(1, 1);
    one(0, 0) = 1.0;
    return monomial(nu, one, order);
}

GeneralizedSeries GeneralizedSeries::truncated(int order) const {
    if (order >= this->order()) return *this;
    if (order < 0) throw dimension_mismatch("series: negative truncation");
    std::vector<Mat> c(c_.begin(), c_.begin() + order + 1);
    return GeneralizedSeries(nu_, std::move(c));
}

GeneralizedSeries GeneralizedSeries::realigned(cplx new_nu) const {
    const cplx diff = nu_ - new_nu;
    if (std::abs(diff.imag()) > 1e-9 || !near_integer(diff.real(), 1e-9) || diff.real() < -1e-9)
        throw domain_error("series: realignment requires a nonnegative integer exponent shift");
    const int k = static_cast<int>(std::lround(diff.real()));
    if (k == 0) return *this;
    std::vector<Mat> c(static_cast<size_t>(k), Mat(coeff_rows(), coeff_cols()));
    c.insert(c.end(), c_.begin(), c_.end());
    return GeneralizedSeries(new_nu, std::move(c));
}

GeneralizedSeries add(const GeneralizedSeries& a, const GeneralizedSeries& b) {
    const cplx d = a.nu() - b.nu();
    if (std::abs(d.imag()) > 1e-9 || !near_integer(d.real(), 1e-9))
        throw domain_error("series add: exponents differ by a non-integer");
    // Align on the smaller exponent; the valid order is the min of the two
    // (shifted) valid orders.
    const GeneralizedSeries& lo = (d.real() >= 0.0) ? b : a;
    const GeneralizedSeries& hi = (d.real() >= 0.0) ? a : b;
    GeneralizedSeries hs = hi.realigned(lo.nu());
    const int order = std::min(lo.order(), hs.order());
    if (lo.coeff_rows() != hs.coeff_rows() || lo.coeff_cols() != hs.coeff_cols())
        throw dimension_mismatch("series add: coefficient shapes differ");
    std::vector<Mat> c;
    c.reserve(order + 1);
    for (int p = 0; p <= order; ++p) c.push_back(lo.coeff(p) + hs.coeff(p));
    return GeneralizedSeries(lo.nu(), std::move(c));
}

GeneralizedSeries scale(cplx s, const GeneralizedSeries& a) {
    std::vector<Mat> c = a.coeffs();
    for (Mat& m : c) m *= s;
    return GeneralizedSeries(a.nu(), std::move(c));
}

GeneralizedSeries moment_derivative(const GeneralizedSeries& f, const MomentSequence& seq) {
    const cplx nu = f.nu();
    const bool integer_nu = std::abs(nu.imag()) <= 1e-12 && near_integer(nu.real()) && nu.real() >= -1e-12;
    if (nu.real() < 1.0 - 1e-12 && !integer_nu)
        throw domain_error("moment_derivative: needs Re(nu) >= 1 or nonnegative integer nu");

    if (integer_nu && std::lround(nu.real()) == 0) {
        // Plain power series: coefficient of z^p becomes a_{p+1} m(p+1)/m(p).
        if (f.order() == 0) {
            std::vector<Mat> c{Mat(f.coeff_rows(), f.coeff_cols())};
            return GeneralizedSeries(0.0, std::move(c));
        }
        std::vector<Mat> c;
        c.reserve(f.order());
        for (int p = 1; p <= f.order(); ++p) c.push_back(f.coeff(p) * ratio(seq, cplx(double(p))));
        return GeneralizedSeries(0.0, std::move(c));
    }
    std::vector<Mat> c;
    c.reserve(f.order() + 1);
    for (int p = 0; p <= f.order(); ++p) c.push_back(f.coeff(p) * ratio(seq, nu + double(p)));
    return GeneralizedSeries(nu - 1.0, std::move(c));
}

bool integer_nu_consistency(const GeneralizedSeries& f, const MomentSequence& seq) {
    const cplx nu = f.nu();
    if (std::abs(nu.imag()) > 1e-12 || !near_integer(nu.real()) || nu.real() < 0.5)
        throw domain_error("integer_nu_consistency: nu must be a positive integer");
    const long n = std::lround(nu.real());

    // Path A: the direct exponent rule.
    GeneralizedSeries direct = moment_derivative(f, seq);

    // Path B: shift into C[[z]], apply the plain rule, shift back.
    GeneralizedSeries shifted = f.realigned(0.0);
    GeneralizedSeries plain = moment_derivative(shifted, seq);
    // plain has exponent 0 and coefficient of z^j equal to a_{j+1-n} r(j+1);
    // drop the structural zeros below j = n-1 to compare with the direct path.
    for (int p = 0; p <= plain.order() && p < static_cast<int>(n) - 1; ++p)
        if (one_norm(plain.coeff(p)) != 0.0) return false;

    for (int p = 0; p <= direct.order(); ++p) {
        const int j = p + static_cast<int>(n) - 1;
        if (j > plain.order()) break;
        const Mat diff = direct.coeff(p) - plain.coeff(j);
        const double scale = one_norm(direct.coeff(p));
        if (one_norm(diff) > 1e-12 * (1.0 + scale)) return false;
    }
    return true;
}

GeneralizedSeries cauchy_product(const GeneralizedSeries& h, const GeneralizedSeries& y) {
    if (std::abs(h.nu()) > 1e-12) throw domain_error("cauchy_product: left factor must have nu = 0");
    if (h.coeff_cols() != y.coeff_rows()) throw dimension_mismatch("cauchy_product: shapes do not chain");
    const int order = std::min(h.order(), y.order());
    std::vector<Mat> c;
    c.reserve(order + 1);
    for (int p = 0; p <= order; ++p) {
        Mat s(h.coeff_rows(), y.coeff_cols());
        for (int j = 0; j <= p; ++j) s += h.coeff(j) * y.coeff(p - j);
        c.push_back(std::move(s));
    }
    return GeneralizedSeries(y.nu(), std::move(c));
}

Mat evaluate(const GeneralizedSeries& f, cplx z) {
    if (on_negative_cut(z)) throw branch_cut_error("evaluate: z on the branch cut (-inf, 0]");
    Mat acc(f.coeff_rows(), f.coeff_cols());
    cplx zp = principal_power(z, f.nu());
    for (int p = 0; p <= f.order(); ++p) {
        acc += f.coeff(p) * zp;
        zp *= z;
    }
    if (!acc.all_finite()) throw overflow_error("evaluate: overflow");
    return acc;
}

// ---------------------------------------------------------------------------
// Log-power expressions
// ---------------------------------------------------------------------------

LogPowerSolution::LogPowerSolution(cplx mu, std::vector<std::vector<cplx>> terms)
    : mu_(mu), terms_(std::move(terms)) {
    trim();
}

LogPowerSolution LogPowerSolution::power(cplx mu) { return LogPowerSolution(mu, {{cplx(1.0)}}); }

void LogPowerSolution::trim() {
    auto poly_zero = [](const std::vector<cplx>& p) {
        for (cplx c : p)
            if (c != cplx(0.0)) return false;
        return true;
    };
    while (!terms_.empty() && poly_zero(terms_.back())) terms_.pop_back();
    for (auto& p : terms_)
        while (!p.empty() && p.back() == cplx(0.0)) p.pop_back();
}

cplx LogPowerSolution::term(int k, int j) const {
    if (k < 0 || k >= static_cast<int>(terms_.size())) return 0.0;
    if (j < 0 || j >= static_cast<int>(terms_[k].size())) return 0.0;
    return terms_[k][j];
}

LogPowerSolution add(const LogPowerSolution& a, const LogPowerSolution& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (std::abs(a.mu() - b.mu()) > 1e-12) {
        // Allow integer exponent offsets by folding them into the polynomials.
        const cplx d = b.mu() - a.mu();
        if (std::abs(d.imag()) > 1e-12 || !near_integer(d.real()) || d.real() < 0.0)
            throw domain_error("logpower add: incompatible exponents");
        const int k = static_cast<int>(std::lround(d.real()));
        std::vector<std::vector<cplx>> shifted = b.terms();
        for (auto& poly : shifted) poly.insert(poly.begin(), static_cast<size_t>(k), cplx(0.0));
        return add(a, LogPowerSolution(a.mu(), std::move(shifted)));
    }
    std::vector<std::vector<cplx>> t = a.terms();
    const auto& tb = b.terms();
    if (tb.size() > t.size()) t.resize(tb.size());
    for (size_t k = 0; k < tb.size(); ++k) {
        if (tb[k].size() > t[k].size()) t[k].resize(tb[k].size(), 0.0);
        for (size_t j = 0; j < tb[k].size(); ++j) t[k][j] += tb[k][j];
    }
    return LogPowerSolution(a.mu(), std::move(t));
}

LogPowerSolution scale(cplx s, const LogPowerSolution& a) {
    if (s == cplx(0.0)) return LogPowerSolution();
    std::vector<std::vector<cplx>> t = a.terms();
    for (auto& poly : t)
        for (cplx& c : poly) c *= s;
    return LogPowerSolution(a.mu(), std::move(t));
}

LogPowerSolution classical_derivative_logpower(const LogPowerSolution& f) {
    if (f.is_zero()) return f;
    // z d/dz [ c z^{mu+j} log^k z ] = c (mu+j) z^{mu+j} log^k z + c k z^{mu+j} log^{k-1} z
    const int K = f.max_log_power();
    std::vector<std::vector<cplx>> t(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto& poly = f.terms()[k];
        for (int j = 0; j < static_cast<int>(poly.size()); ++j) {
            const cplx c = poly[j];
            if (c == cplx(0.0)) continue;
            auto& tk = t[k];
            if (static_cast<int>(tk.size()) <= j) tk.resize(j + 1, 0.0);
            tk[j] += c * (f.mu() + double(j));
            if (k >= 1) {
                auto& tk1 = t[k - 1];
                if (static_cast<int>(tk1.size()) <= j) tk1.resize(j + 1, 0.0);
                tk1[j] += c * double(k);
            }
        }
    }
    return LogPowerSolution(f.mu(), std::move(t));
}

cplx evaluate(const LogPowerSolution& f, cplx z) {
    if (on_negative_cut(z)) throw branch_cut_error("evaluate: z on the branch cut (-inf, 0]");
    if (f.is_zero()) return 0.0;
    const cplx lg = std::log(z);
    cplx acc = 0.0;
    cplx lgk = 1.0;
    for (int k = 0; k <= f.max_log_power(); ++k) {
        cplx poly = 0.0;
        cplx zj = 1.0;
        for (size_t j = 0; j < f.terms()[k].size(); ++j) {
            poly += f.terms()[k][j] * zj;
            zj *= z;
        }
        acc += poly * lgk;
        lgk *= lg;
    }
    return acc * principal_power(z, f.mu());
}

}  // namespace mfloq
