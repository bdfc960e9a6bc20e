#include "mfloq/moments.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <limits>

#include "mfloq/special.hpp"

namespace mfloq {

// ---------------------------------------------------------------------------
// Expression parser for custom sequences: grammar over {numbers, z, + - * / ^,
// gamma(x), qgamma(q, x), parentheses}.
// ---------------------------------------------------------------------------

namespace {

std::string num_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

using ExprFn = std::function<cplx(cplx)>;

struct ExprParser {
    const std::string& s;
    size_t i = 0;

    explicit ExprParser(const std::string& text) : s(text) {}

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw parse_error("expression: " + msg + " at offset " + std::to_string(i));
    }

    ExprFn parse() {
        ExprFn e = expr();
        skip();
        if (i != s.size()) fail("trailing input");
        return e;
    }

    ExprFn expr() {
        ExprFn lhs = term();
        for (;;) {
            if (eat('+')) {
                ExprFn rhs = term();
                lhs = [lhs, rhs](cplx z) { return lhs(z) + rhs(z); };
            } else if (eat('-')) {
                ExprFn rhs = term();
                lhs = [lhs, rhs](cplx z) { return lhs(z) - rhs(z); };
            } else {
                return lhs;
            }
        }
    }

    ExprFn term() {
        ExprFn lhs = factor();
        for (;;) {
            if (eat('*')) {
                ExprFn rhs = factor();
                lhs = [lhs, rhs](cplx z) { return lhs(z) * rhs(z); };
            } else if (eat('/')) {
                ExprFn rhs = factor();
                lhs = [lhs, rhs](cplx z) {
                    cplx d = rhs(z);
                    if (d == cplx(0.0)) throw division_by_zero("expression: division by zero");
                    return lhs(z) / d;
                };
            } else {
                return lhs;
            }
        }
    }

    ExprFn factor() {
        ExprFn base = unary();
        if (eat('^')) {
            ExprFn expo = factor();  // right associative
            return [base, expo](cplx z) { return principal_power(base(z), expo(z)); };
        }
        return base;
    }

    ExprFn unary() {
        if (eat('-')) {
            ExprFn e = unary();
            return [e](cplx z) { return -e(z); };
        }
        (void)eat('+');
        return primary();
    }

    ExprFn primary() {
        skip();
        if (i >= s.size()) fail("unexpected end");
        const char c = s[i];
        if (c == '(') {
            ++i;
            ExprFn e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = i;
            while (end < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
                    s[end] == 'E' || ((s[end] == '+' || s[end] == '-') && (s[end - 1] == 'e' || s[end - 1] == 'E'))))
                ++end;
            double v = 0.0;
            try {
                v = std::stod(s.substr(i, end - i));
            } catch (...) {
                fail("bad number");
            }
            i = end;
            return [v](cplx) { return cplx(v); };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t end = i;
            while (end < s.size() && std::isalnum(static_cast<unsigned char>(s[end]))) ++end;
            std::string name = s.substr(i, end - i);
            i = end;
            if (name == "z") return [](cplx z) { return z; };
            if (name == "i") return [](cplx) { return cplx(0.0, 1.0); };
            if (name == "gamma") {
                if (!eat('(')) fail("gamma expects '('");
                ExprFn arg = expr();
                if (!eat(')')) fail("expected ')'");
                return [arg](cplx z) { return gamma_fn(arg(z)); };
            }
            if (name == "qgamma") {
                if (!eat('(')) fail("qgamma expects '('");
                ExprFn qarg = expr();
                if (!eat(',')) fail("qgamma expects two arguments");
                ExprFn arg = expr();
                if (!eat(')')) fail("expected ')'");
                return [qarg, arg](cplx z) {
                    cplx qv = qarg(z);
                    if (std::abs(qv.imag()) > 1e-12 || qv.real() <= 1.0)
                        throw domain_error("expression: qgamma base must be real > 1");
                    return q_gamma(qv.real(), arg(z));
                };
            }
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character");
    }
};

constexpr double kDomainSlack = 1e-9;

}  // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

MomentSequence MomentSequence::factorial() {
    MomentSequence m;
    m.kind_ = SeqKind::Factorial;
    m.descriptor_ = "factorial";
    return m;
}

MomentSequence MomentSequence::gamma_ratio(double alpha) {
    if (!(alpha > 0.0)) throw domain_error("gammaratio: alpha must be > 0");
    MomentSequence m;
    m.kind_ = SeqKind::GammaRatio;
    m.alpha_ = alpha;
    m.descriptor_ = "gammaratio:alpha=" + num_str(alpha);
    return m;
}

MomentSequence MomentSequence::gevrey(double alpha) {
    if (!(alpha > 0.0)) throw domain_error("gevrey: alpha must be > 0");
    MomentSequence m;
    m.kind_ = SeqKind::Gevrey;
    m.alpha_ = alpha;
    m.descriptor_ = "gevrey:alpha=" + num_str(alpha);
    return m;
}

MomentSequence MomentSequence::q_factorial(double q) {
    if (!(q > 1.0)) throw domain_error("qfactorial: q must be > 1");
    MomentSequence m;
    m.kind_ = SeqKind::QFactorial;
    m.q_ = q;
    m.descriptor_ = "qfactorial:q=" + num_str(q);
    return m;
}

MomentSequence MomentSequence::catalan() {
    MomentSequence m;
    m.kind_ = SeqKind::Catalan;
    m.descriptor_ = "catalan";
    return m;
}

MomentSequence MomentSequence::custom_expr(const std::string& expression) {
    MomentSequence m;
    m.kind_ = SeqKind::CustomExpr;
    ExprParser p(expression);
    m.expr_ = std::make_shared<std::function<cplx(cplx)>>(p.parse());
    m.descriptor_ = "expr:" + expression;
    return m;
}

MomentSequence MomentSequence::custom_table(std::vector<double> values) {
    if (values.empty()) throw domain_error("table: empty");
    for (double v : values)
        if (!(v > 0.0) || !std::isfinite(v)) throw domain_error("table: entries must be positive finite");
    MomentSequence m;
    m.kind_ = SeqKind::CustomTable;
    m.table_ = std::move(values);
    std::string d = "table:[";
    for (size_t i = 0; i < m.table_.size(); ++i) d += (i ? "," : "") + num_str(m.table_[i]);
    m.descriptor_ = d + "]";
    return m;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

long table_index(cplx z, size_t len, const char* what) {
    if (std::abs(z.imag()) > 1e-9 || !near_integer(z.real(), 1e-9))
        throw domain_error(std::string(what) + ": table-backed sequences accept integer arguments only");
    long p = std::lround(z.real());
    if (p < 0 || p >= static_cast<long>(len))
        throw domain_error(std::string(what) + ": index outside the table range");
    return p;
}

}  // namespace

cplx log_eval_m(const MomentSequence& seq, cplx z) {
    if (z.real() < -kDomainSlack) throw domain_error("m(z): requires Re(z) >= 0");
    switch (seq.kind_) {
        case SeqKind::Factorial:
            return ln_gamma(1.0 + z);
        case SeqKind::GammaRatio:
            return ln_gamma(1.0 + z / seq.alpha_);
        case SeqKind::Gevrey:
            return ln_gamma(1.0 + seq.alpha_ * z);
        case SeqKind::QFactorial:
            return log_q_gamma(seq.q_, 1.0 + z);
        case SeqKind::Catalan:
            return ln_gamma(2.0 * z + 1.0) - ln_gamma(z + 2.0) - ln_gamma(z + 1.0);
        case SeqKind::CustomExpr: {
            cplx v = (*seq.expr_)(z);
            if (v == cplx(0.0)) throw division_by_zero("m(z): custom expression vanished");
            return std::log(v);
        }
        case SeqKind::CustomTable:
            return std::log(cplx(seq.table_[table_index(z, seq.table_.size(), "m(z)")]));
    }
    throw domain_error("m(z): unknown kind");
}

cplx eval_m(const MomentSequence& seq, cplx z) {
    if (z.real() < -kDomainSlack) throw domain_error("m(z): requires Re(z) >= 0");
    if (seq.kind_ == SeqKind::CustomExpr) {
        cplx v = (*seq.expr_)(z);
        require_finite(v, "m(z)");
        return v;
    }
    if (seq.kind_ == SeqKind::CustomTable) return cplx(seq.table_[table_index(z, seq.table_.size(), "m(z)")]);
    cplx v = std::exp(log_eval_m(seq, z));
    require_finite(v, "m(z)");
    return v;
}

cplx ratio(const MomentSequence& seq, cplx z) {
    if (z.real() < 1.0 - kDomainSlack) throw domain_error("ratio: requires Re(z) >= 1");
    switch (seq.kind_) {
        case SeqKind::Factorial:
            return z;  // Gamma(1+z)/Gamma(z)
        case SeqKind::Catalan:
            return 4.0 - 6.0 / (z + 1.0);
        case SeqKind::QFactorial:
            // Gamma_q(1+z)/Gamma_q(z) has the closed form (q^z - 1)/(q - 1).
            return q_bracket(seq.q_, z + 1.0);
        case SeqKind::CustomExpr: {
            cplx num = (*seq.expr_)(z);
            cplx den = (*seq.expr_)(z - 1.0);
            if (den == cplx(0.0)) throw division_by_zero("ratio: m(z-1) = 0");
            cplx r = num / den;
            require_finite(r, "ratio");
            return r;
        }
        case SeqKind::CustomTable: {
            long p = table_index(z, seq.table_.size(), "ratio");
            if (p < 1) throw domain_error("ratio: needs z >= 1");
            return cplx(seq.table_[p] / seq.table_[p - 1]);
        }
        default: {
            cplx r = std::exp(log_eval_m(seq, z) - log_eval_m(seq, z - 1.0));
            require_finite(r, "ratio");
            return r;
        }
    }
}

// ---------------------------------------------------------------------------
// Root finding for ratio(mu) = b
// ---------------------------------------------------------------------------

std::vector<cplx> solve_ratio_equation(const MomentSequence& seq, cplx b, const Region& region, double grid_step) {
    if (region.re0 < 1.0 - kDomainSlack) throw domain_error("solve_ratio_equation: region must lie in Re >= 1");
    if (seq.is_integer_only()) {
        // Table sequences: ratio defined at integers only; scan them.
        std::vector<cplx> roots;
        for (long p = std::max(1L, std::lround(std::ceil(region.re0))); p <= std::lround(std::floor(region.re1));
             ++p) {
            if (p >= static_cast<long>(seq.table().size())) break;
            cplx r = ratio(seq, cplx(double(p)));
            if (std::abs(r - b) <= 1e-10 * (1.0 + std::abs(b))) roots.push_back(cplx(double(p)));
        }
        return roots;
    }

    auto f = [&](cplx mu) { return ratio(seq, mu) - b; };
    const int nx = std::max(2, static_cast<int>(std::floor((region.re1 - region.re0) / grid_step)) + 1);
    const int ny = std::max(2, static_cast<int>(std::floor((region.im1 - region.im0) / grid_step)) + 1);
    std::vector<double> mag(static_cast<size_t>(nx) * ny, std::numeric_limits<double>::infinity());
    auto at = [&](int ix, int iy) -> double& { return mag[static_cast<size_t>(iy) * nx + ix]; };

    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            cplx mu(region.re0 + ix * grid_step, region.im0 + iy * grid_step);
            try {
                at(ix, iy) = std::abs(f(mu));
            } catch (const error&) {
                // poles / domain holes: leave infinite
            }
        }

    const double accept = 1e-10 * (1.0 + std::abs(b));
    const double stall_level = 1e-6 * (1.0 + std::abs(b));
    std::vector<cplx> roots;
    auto near_known = [&](cplx mu) {
        for (cplx r : roots)
            if (std::abs(r - mu) <= 1e-6 * (1.0 + std::abs(r))) return true;
        return false;
    };

    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double v = at(ix, iy);
            if (!std::isfinite(v)) continue;
            bool local_min = true;
            for (int dy = -1; dy <= 1 && local_min; ++dy)
                for (int dx = -1; dx <= 1 && local_min; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                    if (at(jx, jy) < v) local_min = false;
                }
            if (!local_min) continue;

            cplx mu(region.re0 + ix * grid_step, region.im0 + iy * grid_step);
            bool converged = false;
            double best_seen = v;
            try {
                for (int it = 0; it < 60; ++it) {
                    cplx fv = f(mu);
                    best_seen = std::min(best_seen, std::abs(fv));
                    if (std::abs(fv) <= accept * 1e-2 || (std::abs(fv) <= accept && it > 2)) {
                        converged = true;
                        break;
                    }
                    const double h = 1e-6 * (1.0 + std::abs(mu));
                    cplx dfv = (f(mu + h) - f(mu - h)) / (2.0 * h);
                    if (dfv == cplx(0.0)) break;
                    cplx step = fv / dfv;
                    // Keep iterates near the search box and inside Re >= 1.
                    if (std::abs(step) > 2.0) step *= 2.0 / std::abs(step);
                    cplx next = mu - step;
                    if (next.real() < 1.0) next = cplx(1.0, next.imag());
                    if (!region.contains(next, 2.0)) break;
                    mu = next;
                }
                if (converged) converged = std::abs(f(mu)) <= accept;
            } catch (const error&) {
                converged = false;
            }
            if (converged && region.contains(mu, grid_step) && mu.real() >= 1.0 - kDomainSlack) {
                if (!near_known(mu)) roots.push_back(mu);
            } else if (!converged && best_seen <= stall_level && !near_known(mu)) {
                // Newton got within sight of a root but could not polish it.
                throw convergence_error("solve_ratio_equation: Newton stalled on a flagged candidate cell near (" +
                                        std::to_string(mu.real()) + ", " + std::to_string(mu.imag()) + ")");
            }
        }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx c) {
        return a.real() != c.real() ? a.real() < c.real() : a.imag() < c.imag();
    });
    return roots;
}

// ---------------------------------------------------------------------------
// Strongly-regular diagnostic
// ---------------------------------------------------------------------------

namespace {

// log m(p) at integer p, in real arithmetic (safe against overflow).
double log_m_int(const MomentSequence& seq, long p) {
    switch (seq.kind()) {
        case SeqKind::Factorial:
            return std::lgamma(1.0 + double(p));
        case SeqKind::GammaRatio:
            return std::lgamma(1.0 + double(p) / seq.alpha());
        case SeqKind::Gevrey:
            return std::lgamma(1.0 + seq.alpha() * double(p));
        case SeqKind::QFactorial: {
            const double q = seq.q();
            double acc = 0.0;
            for (long j = 1; j <= p; ++j)
                acc += double(j) * std::log(q) + std::log1p(-std::pow(q, -double(j))) - std::log(q - 1.0);
            return acc;
        }
        case SeqKind::Catalan:
            return std::lgamma(2.0 * p + 1.0) - std::lgamma(double(p) + 2.0) - std::lgamma(double(p) + 1.0);
        case SeqKind::CustomExpr: {
            cplx v = log_eval_m(seq, cplx(double(p)));
            if (std::abs(v.imag()) > 1e-6) throw domain_error("regularity: m(p) not positive real");
            return v.real();
        }
        case SeqKind::CustomTable:
            if (p >= static_cast<long>(seq.table().size()))
                throw domain_error("regularity: index outside the table");
            return std::log(seq.table()[p]);
    }
    throw domain_error("regularity: unknown kind");
}

double mg_witness(const std::vector<double>& logM, int P) {
    double w = -std::numeric_limits<double>::infinity();
    for (int p = 0; p <= P; ++p)
        for (int q = std::max(1 - p, 0); q <= P; ++q) {
            if (p + q == 0) continue;
            const double e = (logM[p + q] - logM[p] - logM[q]) / double(p + q);
            w = std::max(w, e);
        }
    return std::exp(w);
}

double snq_witness(const std::vector<double>& logM, int P, int tail_end) {
    double w = 0.0;
    for (int p = 0; p <= P; ++p) {
        double tail = 0.0;
        for (int j = p; j < tail_end; ++j) tail += std::exp(logM[j] - logM[j + 1]) / double(j + 1);
        w = std::max(w, tail * std::exp(logM[p + 1] - logM[p]));
    }
    return w;
}

}  // namespace

RegularityReport check_strongly_regular(const MomentSequence& seq, int P) {
    if (P < 2) throw domain_error("check_strongly_regular: P >= 2 required");
    int top = 4 * P + 1;
    if (seq.is_integer_only()) top = std::min<int>(top, static_cast<int>(seq.table().size()) - 1);
    if (top < 2 * P) P = std::max(2, top / 4);

    std::vector<double> logM(top + 1);
    const double log_m0 = log_m_int(seq, 0);
    for (int p = 0; p <= top; ++p) logM[p] = log_m_int(seq, p) - log_m0;  // normalize M_0 = 1

    RegularityReport rep;
    rep.checked_up_to = P;

    rep.lc_ok = true;
    for (int p = 1; p < std::min<int>(P + 1, top); ++p)
        if (2.0 * logM[p] > logM[p - 1] + logM[p + 1] + 1e-9) {
            rep.lc_ok = false;
            break;
        }

    const int half = std::max(2, P / 2);
    const double a_half = mg_witness(logM, half);
    const double a_full = mg_witness(logM, std::min(P, top / 2));
    rep.mg_witness_A = a_full;
    rep.mg_ok = std::isfinite(a_full) && a_full <= 1.05 * a_half;

    const int tail_end = std::min(top - 1, 4 * P);
    rep.snq_witness_B = snq_witness(logM, std::min(P, tail_end - 1), tail_end);
    rep.snq_ok_truncated = std::isfinite(rep.snq_witness_B);
    rep.snq_truncation_warning = true;
    return rep;
}

void check_positive(const MomentSequence& seq, int P) {
    for (int p = 0; p <= P; ++p) {
        if (seq.is_integer_only() && p >= static_cast<int>(seq.table().size())) break;
        double lm;
        try {
            lm = log_m_int(seq, p);
        } catch (const error&) {
            throw domain_error("moment sequence: m(" + std::to_string(p) + ") is not positive");
        }
        if (!std::isfinite(lm)) throw domain_error("moment sequence: m(" + std::to_string(p) + ") not finite in log");
        if (lm > 700.0) break;  // beyond double range; positivity attested in log space anyway
        cplx v = seq.is_integer_only() ? cplx(seq.table()[p]) : eval_m(seq, cplx(double(p)));
        if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real())))
            throw domain_error("moment sequence: m(" + std::to_string(p) + ") is not positive");
    }
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

MomentSequence parse_sequence_descriptor(const std::string& text) {
    auto starts = [&](const char* p) { return text.rfind(p, 0) == 0; };
    auto param_after = [&](size_t pos, const std::string& key) {
        std::string rest = text.substr(pos);
        if (rest.rfind(key + "=", 0) != 0) throw parse_error("sequence descriptor: expected " + key + "=<value>");
        try {
            return std::stod(rest.substr(key.size() + 1));
        } catch (...) {
            throw parse_error("sequence descriptor: bad numeric value in '" + text + "'");
        }
    };
    if (text == "factorial") return MomentSequence::factorial();
    if (text == "catalan") return MomentSequence::catalan();
    if (starts("qfactorial:")) return MomentSequence::q_factorial(param_after(11, "q"));
    if (starts("gammaratio:")) return MomentSequence::gamma_ratio(param_after(11, "alpha"));
    if (starts("gevrey:")) return MomentSequence::gevrey(param_after(7, "alpha"));
    if (starts("expr:")) return MomentSequence::custom_expr(text.substr(5));
    if (starts("table:")) {
        std::string body = text.substr(6);
        if (body.size() < 2 || body.front() != '[' || body.back() != ']')
            throw parse_error("sequence descriptor: table expects [v0,v1,...]");
        std::vector<double> vals;
        std::string item;
        for (size_t i = 1; i < body.size(); ++i) {
            char c = body[i];
            if (c == ',' || c == ']') {
                if (!item.empty()) {
                    try {
                        vals.push_back(std::stod(item));
                    } catch (...) {
                        throw parse_error("sequence descriptor: bad table entry '" + item + "'");
                    }
                    item.clear();
                }
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                item += c;
            }
        }
        return MomentSequence::custom_table(std::move(vals));
    }
    throw parse_error("unknown sequence descriptor '" + text + "'");
}

}  // namespace mfloq
