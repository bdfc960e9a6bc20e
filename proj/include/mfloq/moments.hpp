#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mfloq/core.hpp"

namespace mfloq {

enum class SeqKind { Factorial, GammaRatio, Gevrey, QFactorial, Catalan, CustomExpr, CustomTable };

// A moment sequence m(p), evaluatable as an analytic extension m(z) on
// Re(z) >= 0, with ratio r(z) = m(z)/m(z-1) on Re(z) >= 1.
//
//   factorial      m(z) = Gamma(1+z)
//   gammaratio(a)  m(z) = Gamma(1+z/a)          a > 0
//   gevrey(a)      m(z) = Gamma(1+a z)          a > 0
//   qfactorial(q)  m(z) = Gamma_q(1+z)          q > 1
//   catalan        m(z) = Gamma(2z+1) / (Gamma(z+2) Gamma(z+1))
//   expr           closed form over {gamma, qgamma, powers, rationals}
//   table          positive values on the integers; ratio only at integers
class MomentSequence {
  public:
    static MomentSequence factorial();
    static MomentSequence gamma_ratio(double alpha);
    static MomentSequence gevrey(double alpha);
    static MomentSequence q_factorial(double q);
    static MomentSequence catalan();
    static MomentSequence custom_expr(const std::string& expression);
    static MomentSequence custom_table(std::vector<double> values);

    SeqKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double q() const { return q_; }
    const std::string& descriptor() const { return descriptor_; }
    const std::vector<double>& table() const { return table_; }

    bool is_integer_only() const { return kind_ == SeqKind::CustomTable; }

  private:
    MomentSequence() = default;
    friend cplx eval_m(const MomentSequence&, cplx);
    friend cplx log_eval_m(const MomentSequence&, cplx);
    friend cplx ratio(const MomentSequence&, cplx);

    SeqKind kind_ = SeqKind::Factorial;
    double alpha_ = 1.0;
    double q_ = 2.0;
    std::vector<double> table_;
    std::shared_ptr<std::function<cplx(cplx)>> expr_;
    std::string descriptor_;
};

// m(z) for Re(z) >= 0. Throws domain_error off the half-plane, pole_error from
// the underlying Gamma evaluations, overflow_error when not representable.
cplx eval_m(const MomentSequence& seq, cplx z);

// log m(z); safe where m itself would overflow. Imaginary part principal-composed.
cplx log_eval_m(const MomentSequence& seq, cplx z);

// r(z) = m(z)/m(z-1) for Re(z) >= 1, computed in log space for the
// Gamma-expression kinds.
cplx ratio(const MomentSequence& seq, cplx z);

struct Region {
    double re0 = 1.0, re1 = 50.0, im0 = -25.0, im1 = 25.0;
    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= re0 - slack && z.real() <= re1 + slack && z.imag() >= im0 - slack &&
               z.imag() <= im1 + slack;
    }
};

// All roots of ratio(mu) = b inside the region, by grid scan (step `grid_step`)
// plus complex Newton polishing. Each returned mu satisfies
// |ratio(mu) - b| <= 1e-10 (1 + |b|).
std::vector<cplx> solve_ratio_equation(const MomentSequence& seq, cplx b, const Region& region = Region{},
                                       double grid_step = 0.25);

struct RegularityReport {
    bool lc_ok = false;
    bool mg_ok = false;
    double mg_witness_A = 0.0;       // minimal feasible witness over the scanned range
    bool snq_ok_truncated = false;   // finite witness exists for the truncated sums
    double snq_witness_B = 0.0;
    int checked_up_to = 0;
    bool snq_truncation_warning = true;  // necessary-style check only
};

// Finite-index diagnostic for (lc)/(mg)/(snq) on the normalized M_p = m(p)/m(0).
// (lc) is exact up to index P; (mg) compares the minimal witness at P against
// the witness at P/2 to flag unbounded growth; (snq) truncates tails at 4P.
RegularityReport check_strongly_regular(const MomentSequence& seq, int P);

// m(p) > 0 for integer p = 0..P (skipping values past double range); throws on violation.
void check_positive(const MomentSequence& seq, int P = 200);

// Descriptor grammar: "factorial", "catalan", "qfactorial:q=2",
// "gammaratio:alpha=2", "gevrey:alpha=0.5", "table:[1,1,2,5,14]",
// "expr:gamma(1+1/z)".
MomentSequence parse_sequence_descriptor(const std::string& text);

}  // namespace mfloq
