#include "mfloq/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace mfloq::cli {

Mode mode_from_string(const std::string& s) {
    if (s == "solve") return Mode::Solve;
    if (s == "basis") return Mode::Basis;
    if (s == "zmb") return Mode::Zmb;
    if (s == "planar") return Mode::Planar;
    if (s == "check") return Mode::Check;
    if (s == "verify" || s == "verify-jackson") return Mode::Verify;
    if (s == "cov" || s == "change-of-variable") return Mode::Cov;
    throw parse_error("unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Solve: return "solve";
        case Mode::Basis: return "basis";
        case Mode::Zmb: return "zmb";
        case Mode::Planar: return "planar";
        case Mode::Check: return "check";
        case Mode::Verify: return "verify";
        case Mode::Cov: return "cov";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Problem parsing
// ---------------------------------------------------------------------------

namespace {

cplx complex_entry(const toml::Value& v, const std::string& what) {
    if (v.type == toml::Value::Type::Number) return cplx(v.num, 0.0);
    if (v.type == toml::Value::Type::Array) {
        if (v.arr.size() != 2) throw parse_error(what + ": complex entries are [re, im]");
        return cplx(v.arr[0].as_number(what + " re"), v.arr[1].as_number(what + " im"));
    }
    throw parse_error(what + ": expected a number or [re, im]");
}

Mat matrix_entry(const toml::Value& v, const std::string& what) {
    const auto& rows = v.as_array(what);
    if (rows.empty()) throw parse_error(what + ": empty matrix");
    const int n = static_cast<int>(rows.size());
    int m = -1;
    Mat out;
    for (int i = 0; i < n; ++i) {
        const auto& row = rows[i].as_array(what + " row");
        if (m < 0) {
            m = static_cast<int>(row.size());
            out = Mat(n, m);
        }
        if (static_cast<int>(row.size()) != m) throw parse_error(what + ": ragged rows");
        for (int j = 0; j < m; ++j) out(i, j) = complex_entry(row[j], what + " entry");
    }
    return out;
}

}  // namespace

ProblemFile parse_problem(const toml::Value& root) {
    ProblemFile p;
    if (root.has("version")) p.version = root.at("version").as_integer("version");
    if (!root.has("problem")) throw parse_error("problem file: missing [problem] table");
    const toml::Value& prob = root.at("problem");

    p.mode = mode_from_string(prob.at("mode").as_string("mode"));
    p.seq = parse_sequence_descriptor(prob.at("sequence").as_string("sequence"));
    if (prob.has("B")) p.B = matrix_entry(prob.at("B"), "B");
    if (prob.has("A")) p.A = matrix_entry(prob.at("A"), "A");
    if (p.B.empty() && !p.A.empty()) p.B = Mat(p.A.rows(), p.A.cols());
    if (p.A.empty() && !p.B.empty()) p.A = Mat(p.B.rows(), p.B.cols());
    if (p.B.empty()) throw parse_error("problem file: at least one of A, B required");
    if (!p.B.is_square() || p.A.rows() != p.B.rows() || !p.A.is_square())
        throw parse_error("problem file: A and B must be square of equal dimension");

    if (prob.has("mu")) {
        const toml::Value& mu = prob.at("mu");
        if (mu.type == toml::Value::Type::String) {
            if (mu.str != "auto") throw parse_error("mu: expected \"auto\" or complex value(s)");
            p.mu_auto = true;
        } else if (mu.type == toml::Value::Type::Array && !mu.arr.empty() &&
                   mu.arr[0].type == toml::Value::Type::Array) {
            p.mu_auto = false;
            for (const auto& e : mu.arr) p.mu.push_back(complex_entry(e, "mu"));
        } else {
            p.mu_auto = false;
            p.mu.push_back(complex_entry(mu, "mu"));
        }
    }
    if (prob.has("truncation")) p.truncation = static_cast<int>(prob.at("truncation").as_integer("truncation"));
    if (p.truncation < 1) throw parse_error("problem file: truncation N >= 1 required");
    if (prob.has("p_max")) p.p_max = prob.at("p_max").as_integer("p_max");
    if (prob.has("lambda")) p.lambda = complex_entry(prob.at("lambda"), "lambda");
    if (prob.has("n_offset")) p.n_offset = prob.at("n_offset").as_integer("n_offset");
    if (prob.has("region")) {
        const auto& r = prob.at("region").as_array("region");
        if (r.size() != 4) throw parse_error("region: expected [re0, re1, im0, im1]");
        p.region = Region{r[0].as_number("region"), r[1].as_number("region"), r[2].as_number("region"),
                          r[3].as_number("region")};
    }
    if (prob.has("tolerances")) {
        const toml::Value& t = prob.at("tolerances");
        if (t.has("eps_spec")) p.tol.eps_spec_factor = t.at("eps_spec").as_number("eps_spec");
        if (t.has("eps_res")) p.tol.eps_res = t.at("eps_res").as_number("eps_res");
    }
    if (prob.has("jordan_hint")) {
        const toml::Value& h = prob.at("jordan_hint");
        JordanDecomposition jd;
        jd.P = matrix_entry(h.at("P"), "jordan_hint.P");
        jd.J = matrix_entry(h.at("J"), "jordan_hint.J");
        p.jordan_hint = jd;
    }
    return p;
}

ProblemFile parse_problem_file(const std::string& path) { return parse_problem(toml::parse_file(path)); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json json_complex(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw parse_error("json complex: expected [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

json to_json(const GeneralizedSeries& s) {
    json coeffs = json::array();
    for (int p = 0; p <= s.order(); ++p) {
        json cp = json::array();
        for (int i = 0; i < s.coeff_rows(); ++i)
            for (int j = 0; j < s.coeff_cols(); ++j) cp.push_back(json_complex(s.coeff(p)(i, j)));
        coeffs.push_back(cp);
    }
    return json{{"nu", json_complex(s.nu())},
                {"rows", s.coeff_rows()},
                {"cols", s.coeff_cols()},
                {"coeffs", coeffs}};
}

GeneralizedSeries series_from_json(const json& j) {
    const cplx nu = complex_from_json(j.at("nu"));
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    std::vector<Mat> c;
    for (const auto& cp : j.at("coeffs")) {
        Mat m(rows, cols);
        int k = 0;
        for (int i = 0; i < rows; ++i)
            for (int jj = 0; jj < cols; ++jj) m(i, jj) = complex_from_json(cp.at(k++));
        c.push_back(std::move(m));
    }
    return GeneralizedSeries(nu, std::move(c));
}

json to_json(const LogPowerSolution& s) {
    json terms = json::object();
    for (int k = 0; k <= s.max_log_power(); ++k) {
        json poly = json::array();
        for (cplx c : s.terms()[k]) poly.push_back(json_complex(c));
        terms[std::to_string(k)] = poly;
    }
    return json{{"mu", s.is_zero() ? json_complex(0.0) : json_complex(s.mu())}, {"log_terms", terms}};
}

json to_json(const SymbolicSolutionMatrix& sm) {
    json cols = json::array();
    for (const auto& col : sm.columns) {
        if (std::holds_alternative<MonomialColumn>(col)) {
            const auto& m = std::get<MonomialColumn>(col);
            json s0 = json::array();
            for (int i = 0; i < m.s0.rows(); ++i) s0.push_back(json_complex(m.s0[i]));
            cols.push_back(json{{"type", "monomial"}, {"mu", json_complex(m.mu)}, {"s0", s0}});
        } else if (std::holds_alternative<LogPowerColumn>(col)) {
            const auto& c = std::get<LogPowerColumn>(col);
            json comp = json::array();
            for (const auto& f : c.comp) comp.push_back(to_json(f));
            cols.push_back(json{{"type", "logpower"}, {"components", comp}});
        } else {
            const auto& qc = std::get<QThetaColumn>(col);
            // parameters serialized, not values
            json comp = json::array();
            for (const auto& entries : qc.comp) {
                json row = json::array();
                for (const auto& [w, idx] : entries)
                    row.push_back(json{{"weight", json_complex(w)}, {"h_index", idx + 1}});
                comp.push_back(row);
            }
            cols.push_back(json{{"type", "qtheta"},
                                {"q", qc.q},
                                {"c", json_complex(qc.c)},
                                {"mu", json_complex(qc.mu)},
                                {"truncation", static_cast<int>(qc.family->h.size())},
                                {"components", comp}});
        }
    }
    json out{{"type", "symbolic_matrix"}, {"n", sm.n}, {"columns", cols}};
    if (!sm.verification_kind.empty()) {
        out["verification"] = json{{"kind", sm.verification_kind}, {"residual", sm.verification_residual}};
    }
    return out;
}

json to_json(const H1Report& r) {
    json eigvec = json::array();
    for (int i = 0; i < r.eigvec.rows(); ++i) eigvec.push_back(json_complex(r.eigvec[i]));
    return json{{"holds", r.holds},
                {"mu", json_complex(r.mu)},
                {"shift", r.shift},
                {"mu_ratio_in_spectrum", r.mu_ratio_in_spectrum},
                {"eigvec", eigvec},
                {"resonances", r.resonances},
                {"checked_up_to", r.checked_up_to},
                {"ratio_left_double_range", r.ratio_left_double_range}};
}

json to_json(const H2Report& r) {
    return json{{"holds", r.holds},
                {"bound_C", r.bound_C},
                {"checked_up_to", r.checked_up_to},
                {"monotone_tail", r.monotone_tail},
                {"resonant_p", r.resonant_p},
                {"ratio_left_double_range", r.ratio_left_double_range}};
}

json to_json(const Coro1Report& r) {
    return json{{"holds", r.holds},          {"norm_B", r.norm_B},
                {"min_abs_ratio", r.min_abs_ratio}, {"margin", r.margin},
                {"sup_ratio_inverse", r.sup_ratio_inverse}, {"inverse_tail_monotone", r.inverse_tail_monotone},
                {"note", r.note}};
}

json problem_to_json(const ProblemFile& p) {
    json mu;
    if (p.mu_auto) {
        mu = "auto";
    } else if (p.mu.size() == 1) {
        mu = json_complex(p.mu[0]);
    } else {
        mu = json::array();
        for (cplx m : p.mu) mu.push_back(json_complex(m));
    }
    json out{{"sequence", p.seq.descriptor()},
             {"n", p.B.rows()},
             {"mode", mode_name(p.mode)},
             {"mu", mu},
             {"truncation", p.truncation},
             {"p_max", p.p_max},
             {"tolerances", json{{"eps_spec", p.tol.eps_spec_factor}, {"eps_res", p.tol.eps_res}}}};
    if (p.lambda) out["lambda"] = json_complex(*p.lambda);
    if (p.n_offset != 0) out["n_offset"] = p.n_offset;
    return out;
}

// ---------------------------------------------------------------------------
// Mode execution
// ---------------------------------------------------------------------------

namespace {

json floquet_to_json(const FloquetSolution& sol, double res) {
    json meta = json::object();
    for (const auto& [k, v] : sol.metadata) meta[k] = json_complex(v);
    json diag{{"coeff_norms", sol.diagnostics.coeff_norms},
              {"geometric_rate_estimate", sol.diagnostics.geometric_rate_estimate}};
    json out{{"type", "floquet"}, {"mu", json_complex(sol.mu)}, {"series", to_json(sol.series)},
             {"residual", res},   {"diagnostics", diag}};
    if (!meta.empty()) out["metadata"] = meta;
    return out;
}

cplx auto_exponent(const ProblemFile& p) {
    SpectralData sd = eigen(p.B, p.tol.eps_spec_factor);
    auto distinct = distinct_eigenvalues(sd, 10.0 * p.tol.eps_spec_factor * (1.0 + one_norm(p.B)));
    std::sort(distinct.begin(), distinct.end(), [](const auto& a, const auto& b) {
        return a.first.real() != b.first.real() ? a.first.real() < b.first.real()
                                                : a.first.imag() < b.first.imag();
    });
    for (const auto& [eig, mult] : distinct) {
        auto roots = solve_ratio_equation(p.seq, eig, p.region);
        if (!roots.empty()) return roots.front();
    }
    throw no_exponent_found("solve: no exponent found in the region for any eigenvalue of B");
}

ProblemSpec make_spec(const ProblemFile& p) {
    return ProblemSpec{p.A, p.B, p.seq, p.truncation, p.p_max, p.tol};
}

void run_check(const ProblemFile& p, json& bundle) {
    const cplx mu = p.mu_auto ? auto_exponent(p) : p.mu[0];
    H1Report h1 = (p.n_offset > 0 || mu.real() < 1.0 - 1e-12)
                      ? check_h1_shifted(p.B, p.seq, mu, p.n_offset, p.p_max, p.tol.eps_spec_factor)
                      : check_h1(p.B, p.seq, mu, p.p_max, p.tol.eps_spec_factor);
    json rep{{"h1", to_json(h1)}};
    const cplx mu_eff = mu + double(h1.shift);
    if (h1.holds) {
        rep["h2"] = to_json(check_h2(p.B, p.seq, mu_eff, p.p_max, p.tol.eps_spec_factor));
        rep["coro1"] = to_json(check_coro1(p.B, p.seq, mu_eff, p.p_max));
    }
    bundle["hypothesis_report"] = rep;
    bundle["status"] = h1.holds ? "ok" : "hypothesis_failed";
}

void run_solve(const ProblemFile& p, json& bundle) {
    const cplx mu = p.mu_auto ? auto_exponent(p) : p.mu[0];
    H1Report h1 = check_h1(p.B, p.seq, mu, p.p_max, p.tol.eps_spec_factor);
    json rep{{"h1", to_json(h1)}};
    if (!h1.holds) {
        bundle["hypothesis_report"] = rep;
        bundle["status"] = "hypothesis_failed";
        return;
    }
    rep["h2"] = to_json(check_h2(p.B, p.seq, mu, p.p_max, p.tol.eps_spec_factor));
    rep["coro1"] = to_json(check_coro1(p.B, p.seq, mu, p.p_max));
    bundle["hypothesis_report"] = rep;

    ProblemSpec spec = make_spec(p);
    FloquetSolution sol = floquet_coefficients(spec, mu, h1.eigvec);
    const double res = residual(sol, spec);
    bundle["solutions"] = json::array({floquet_to_json(sol, res)});
    bundle["residuals"] = json::array({res});
    bundle["status"] = "ok";
}

void run_basis(const ProblemFile& p, json& bundle) {
    ProblemSpec spec = make_spec(p);
    std::vector<FloquetSolution> basis = floquet_basis(spec, p.region);
    json sols = json::array();
    json residuals = json::array();
    for (const auto& sol : basis) {
        const double res = residual(sol, spec);
        sols.push_back(floquet_to_json(sol, res));
        residuals.push_back(res);
    }
    bundle["solutions"] = sols;
    bundle["residuals"] = residuals;
    bundle["status"] = "ok";
}

void run_zmb(const ProblemFile& p, json& bundle) {
    if (one_norm(p.A) > 0.0) throw domain_error("zmb: the generalized power solves z d_m y = B y; leave A = 0");
    SymbolicSolutionMatrix sm =
        zmb_general(p.B, p.seq, p.region, p.p_max, p.tol.eps_spec_factor, p.jordan_hint);
    bundle["solutions"] = json::array({to_json(sm)});
    bundle["residuals"] = json::array({sm.verification_residual});
    bundle["status"] = "ok";
}

void run_planar(const ProblemFile& p, json& bundle) {
    if (p.B.rows() != 2) throw domain_error("planar: needs a 2x2 system");
    const double btol = 1e-9 * (1.0 + one_norm(p.B));
    const bool diag = std::abs(p.B(0, 1)) <= btol && std::abs(p.B(1, 0)) <= btol;
    const bool jblock = std::abs(p.B(1, 0)) <= btol && std::abs(p.B(0, 1) - 1.0) <= btol &&
                        std::abs(p.B(0, 0) - p.B(1, 1)) <= btol;
    if (diag) {
        cplx mu1, mu2;
        if (p.mu_auto) {
            auto r1 = solve_ratio_equation(p.seq, p.B(0, 0), p.region);
            auto r2 = solve_ratio_equation(p.seq, p.B(1, 1), p.region);
            if (r1.empty() || r2.empty()) throw no_exponent_found("planar: no exponent for a diagonal entry");
            mu1 = r1.front();
            mu2 = r2.front();
        } else {
            if (p.mu.size() != 2) throw domain_error("planar diagonal: supply mu = [[re,im],[re,im]] or \"auto\"");
            mu1 = p.mu[0];
            mu2 = p.mu[1];
            for (int k = 0; k < 2; ++k)
                if (std::abs(ratio(p.seq, k == 0 ? mu1 : mu2) - p.B(k, k)) > 1e-8 * (1.0 + std::abs(p.B(k, k))))
                    throw domain_error("planar diagonal: ratio(mu_k) does not match B's diagonal");
        }
        PlanarDiagonalResult res = planar_diagonal(p.A, p.seq, mu1, mu2, p.truncation, p.p_max,
                                                   p.tol.eps_spec_factor);
        ProblemSpec spec{p.A, res.B, p.seq, p.truncation, p.p_max, p.tol};
        const double r1 = residual(res.first, spec), r2 = residual(res.second, spec);
        json sols = json::array({floquet_to_json(res.first, r1), floquet_to_json(res.second, r2)});
        bundle["solutions"] = sols;
        bundle["residuals"] = json::array({r1, r2});
        json checks = json::array();
        for (const auto& c : {res.check_first, res.check_second})
            checks.push_back(json{{"applicable", c.applicable}, {"max_rel_dev", c.max_rel_dev}});
        bundle["diagnostics"] = json{{"closed_form_checks", checks}, {"shape", "diagonal"}};
        bundle["status"] = "ok";
        return;
    }
    if (!jblock) throw domain_error("planar: B must be diag(ratio(mu1), ratio(mu2)) or [[m1,1],[0,m1]]");
    cplx mu;
    if (p.mu_auto) {
        auto roots = solve_ratio_equation(p.seq, p.B(0, 0), p.region);
        if (roots.empty()) throw no_exponent_found("planar: no exponent for the block eigenvalue");
        mu = roots.front();
    } else {
        mu = p.mu[0];
        if (std::abs(ratio(p.seq, mu) - p.B(0, 0)) > 1e-8 * (1.0 + std::abs(p.B(0, 0))))
            throw domain_error("planar jordan: ratio(mu) does not match the block eigenvalue");
    }
    PlanarJordanResult res = planar_jordan(p.A, p.seq, mu, p.truncation, p.p_max, p.tol.eps_spec_factor);
    ProblemSpec spec{p.A, res.B, p.seq, p.truncation, p.p_max, p.tol};
    const double r1 = residual(res.first, spec);
    const double r2 = planar_jordan_second_residual(res, p.A, p.seq);
    json second{{"type", "jordan_second"},
                {"plain", to_json(res.second_plain)},
                {"h_part", to_json(res.second_h)},
                {"residual", r2}};
    if (std::holds_alternative<HTildeClassical>(res.htilde)) {
        second["htilde"] = json{{"kind", "log"}, {"value", to_json(std::get<HTildeClassical>(res.htilde).value)}};
    } else if (std::holds_alternative<HTildeQ>(res.htilde)) {
        const auto& fam = *std::get<HTildeQ>(res.htilde).family;
        second["htilde"] = json{{"kind", "qlog"}, {"q", fam.q}, {"c", json_complex(fam.c)},
                                {"mu", json_complex(cplx(double(fam.mu)))}};
    } else {
        second["htilde"] = json{{"kind", "abstract"}};
    }
    bundle["solutions"] = json::array({floquet_to_json(res.first, r1), second});
    bundle["residuals"] = json::array({r1, r2});
    bundle["diagnostics"] =
        json{{"closed_form_checks",
              json::array({json{{"applicable", res.check.applicable}, {"max_rel_dev", res.check.max_rel_dev}}})},
             {"shape", "jordan"}};
    bundle["status"] = "ok";
}

void run_verify(const ProblemFile& p, json& bundle) {
    if (p.seq.kind() != SeqKind::QFactorial)
        throw domain_error("verify: the Jackson check applies to qfactorial sequences");
    run_solve(p, bundle);
    if (bundle["status"] != "ok") return;
    GeneralizedSeries series = series_from_json(bundle["solutions"][0]["series"]);
    std::vector<cplx> pts;
    for (int k = 1; k <= 20; ++k) pts.push_back(std::polar(0.05 + 0.045 * k, 0.3 + 0.27 * k));
    const double dev = verify_jackson(series, p.seq.q(), pts);
    json monos = json::array();
    for (int pw = 0; pw <= 10; ++pw) {
        GeneralizedSeries mono(cplx(double(pw)), {Mat::identity(1)});
        monos.push_back(verify_jackson(mono, p.seq.q(), pts));
    }
    bundle["diagnostics"] = json{{"jackson_deviation", dev}, {"jackson_monomials", monos}, {"samples", 20}};
    bundle["status"] = (dev <= 1e-10) ? "ok" : "hypothesis_failed";
}

void run_cov(const ProblemFile& p, json& bundle) {
    if (!p.lambda) throw domain_error("cov: lambda required");
    const cplx mu = p.mu_auto ? auto_exponent(p) : p.mu[0];
    H1Report h1 = check_h1(p.B, p.seq, mu, p.p_max, p.tol.eps_spec_factor);
    bundle["hypothesis_report"] = json{{"h1", to_json(h1)}};
    if (!h1.holds) {
        bundle["status"] = "hypothesis_failed";
        return;
    }
    ChangeOfVariable cov = change_of_variable(p.A, p.B, p.seq, mu, *p.lambda, p.truncation, p.p_max,
                                              p.tol.eps_spec_factor);
    // Consistency: h * (solution of the A - lambda I system) vs the direct solution.
    ProblemSpec direct = make_spec(p);
    ProblemSpec shifted{p.A - Mat::identity(p.B.rows()) * (*p.lambda), p.B, p.seq, p.truncation, p.p_max, p.tol};
    FloquetSolution y = floquet_coefficients(direct, mu, h1.eigvec);
    FloquetSolution yt = floquet_coefficients(shifted, mu, h1.eigvec);
    GeneralizedSeries conv = cauchy_product(cov.h, yt.series);
    double scale = 0.0, dev = 0.0;
    for (int k = 0; k <= p.truncation; ++k) scale = std::max(scale, one_norm(y.series.coeff(k)));
    for (int k = 0; k <= p.truncation; ++k)
        dev = std::max(dev, one_norm(conv.coeff(k) - y.series.coeff(k)) / (1.0 + scale));
    bundle["solutions"] = json::array({json{{"type", "change_of_variable"},
                                            {"lambda", json_complex(*p.lambda)},
                                            {"h", to_json(cov.h)},
                                            {"consistency_deviation", dev}}});
    bundle["residuals"] = json::array({dev});
    bundle["status"] = "ok";
}

}  // namespace

json run_problem(const ProblemFile& file, const Options& opts) {
    ProblemFile p = file;
    if (opts.pmax_override) p.p_max = *opts.pmax_override;
    if (opts.trunc_override) p.truncation = *opts.trunc_override;
    if (opts.tol_override) p.tol.eps_spec_factor = *opts.tol_override;
    if (opts.region_override) p.region = *opts.region_override;

    const auto t0 = std::chrono::steady_clock::now();
    json bundle;
    bundle["version"] = 1;
    bundle["mode"] = mode_name(p.mode);
    bundle["problem"] = problem_to_json(p);
    switch (p.mode) {
        case Mode::Check: run_check(p, bundle); break;
        case Mode::Solve: run_solve(p, bundle); break;
        case Mode::Basis: run_basis(p, bundle); break;
        case Mode::Zmb: run_zmb(p, bundle); break;
        case Mode::Planar: run_planar(p, bundle); break;
        case Mode::Verify: run_verify(p, bundle); break;
        case Mode::Cov: run_cov(p, bundle); break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    // Timing is zeroed unless requested: byte-identical output for identical input.
    bundle["timing"] = json{{"seconds", opts.timing ? seconds : 0.0}};
    return bundle;
}

// ---------------------------------------------------------------------------
// Report formatting
// ---------------------------------------------------------------------------

namespace {

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_complex(const json& j) {
    return "(" + fmt12(j[0].get<double>()) + ", " + fmt12(j[1].get<double>()) + ")";
}

}  // namespace

std::string format_report(const json& bundle) {
    std::ostringstream os;
    os << "mode: " << bundle["mode"].get<std::string>() << "\n";
    const json& prob = bundle["problem"];
    os << "sequence: " << prob["sequence"].get<std::string>() << "\n";
    os << "n: " << prob["n"] << "  truncation: " << prob["truncation"] << "  p_max: " << prob["p_max"] << "\n";
    os << "status: " << bundle["status"].get<std::string>() << "\n";
    if (bundle.contains("hypothesis_report")) {
        const json& rep = bundle["hypothesis_report"];
        if (rep.contains("h1")) {
            const json& h1 = rep["h1"];
            os << "h1: " << (h1["holds"].get<bool>() ? "holds" : "fails") << "  mu = " << fmt_complex(h1["mu"]);
            if (h1["shift"].get<long>() > 0) os << "  shift N = " << h1["shift"];
            os << "  checked_up_to = " << h1["checked_up_to"] << "\n";
            const auto& res = h1["resonances"];
            if (!res.empty()) {
                os << "resonances:\n";
                for (const auto& r : res) os << "  p = " << r << "\n";
            }
        }
        if (rep.contains("h2")) {
            const json& h2 = rep["h2"];
            os << "h2: bound_C = " << fmt12(h2["bound_C"].get<double>())
               << "  monotone_tail = " << (h2["monotone_tail"].get<bool>() ? "yes" : "no") << "\n";
        }
        if (rep.contains("coro1")) {
            const json& c1 = rep["coro1"];
            os << "coro1: " << (c1["holds"].get<bool>() ? "holds" : "fails")
               << "  margin = " << fmt12(c1["margin"].get<double>()) << "\n";
        }
    }
    if (bundle.contains("solutions")) {
        const json& sols = bundle["solutions"];
        if (sols.empty()) {
            os << "no Floquet solutions found in region\n";
        } else {
            for (size_t i = 0; i < sols.size(); ++i) {
                const json& s = sols[i];
                const std::string type = s["type"].get<std::string>();
                os << "solution[" << i << "]: type = " << type;
                if (s.contains("mu")) os << "  mu = " << fmt_complex(s["mu"]);
                if (s.contains("residual")) os << "  residual = " << fmt12(s["residual"].get<double>());
                os << "\n";
                if (s.contains("series")) {
                    const json& coeffs = s["series"]["coeffs"];
                    const size_t shown = std::min<size_t>(coeffs.size(), 5);
                    for (size_t p = 0; p < shown; ++p) {
                        os << "  p=" << p << ":";
                        for (const auto& e : coeffs[p]) os << " " << fmt_complex(e);
                        os << "\n";
                    }
                }
                if (type == "symbolic_matrix" || s.contains("columns")) {
                    const json& cols = s["columns"];
                    for (size_t c = 0; c < cols.size(); ++c)
                        os << "  column[" << c << "]: " << cols[c]["type"].get<std::string>() << "\n";
                    if (s.contains("verification"))
                        os << "  verification(" << s["verification"]["kind"].get<std::string>()
                           << ") residual = " << fmt12(s["verification"]["residual"].get<double>()) << "\n";
                }
            }
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Command line driver
// ---------------------------------------------------------------------------

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot write '" + tmp + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

namespace {

std::string error_type_name(const error& e) {
    if (dynamic_cast<const parse_error*>(&e)) return "ParseError";
    if (dynamic_cast<const pole_error*>(&e)) return "PoleError";
    if (dynamic_cast<const overflow_error*>(&e)) return "OverflowError";
    if (dynamic_cast<const branch_cut_error*>(&e)) return "BranchCutError";
    if (dynamic_cast<const division_by_zero*>(&e)) return "DivisionByZero";
    if (dynamic_cast<const singular_matrix*>(&e)) return "SingularMatrix";
    if (dynamic_cast<const convergence_error*>(&e)) return "ConvergenceError";
    if (dynamic_cast<const ill_conditioned*>(&e)) return "IllConditioned";
    if (dynamic_cast<const hint_rejected*>(&e)) return "HintRejected";
    if (dynamic_cast<const dimension_mismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const non_commuting*>(&e)) return "NonCommuting";
    if (dynamic_cast<const resonant*>(&e)) return "Resonant";
    if (dynamic_cast<const no_exponent_found*>(&e)) return "NoExponentFound";
    if (dynamic_cast<const h3_unavailable*>(&e)) return "H3Unavailable";
    if (dynamic_cast<const telescope_divergence*>(&e)) return "TelescopeDivergence";
    if (dynamic_cast<const pole_proximity*>(&e)) return "PoleProximity";
    if (dynamic_cast<const eigvec_residual*>(&e)) return "EigvecResidual";
    if (dynamic_cast<const growth_overflow*>(&e)) return "GrowthOverflow";
    if (dynamic_cast<const domain_error*>(&e)) return "DomainError";
    return "Error";
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string coeffs_csv(const json& bundle) {
    std::ostringstream os;
    int sol_idx = 0;
    for (const auto& s : bundle.value("solutions", json::array())) {
        if (!s.contains("series")) continue;
        const json& series = s["series"];
        const int entries = static_cast<int>(series["rows"].get<int>() * series["cols"].get<int>());
        os << "# solution " << sol_idx << " mu = " << series["nu"].dump() << "\n";
        os << "p";
        for (int e = 0; e < entries; ++e) os << ",re_" << e << ",im_" << e;
        os << "\n";
        const json& coeffs = series["coeffs"];
        for (size_t p = 0; p < coeffs.size(); ++p) {
            os << p;
            for (const auto& e : coeffs[p])
                os << "," << csv_num(e[0].get<double>()) << "," << csv_num(e[1].get<double>());
            os << "\n";
        }
        ++sol_idx;
    }
    return os.str();
}

std::string eval_csv(const json& bundle) {
    // Samples along a ray: floquet series evaluated on (0, 1].
    std::ostringstream os;
    int sol_idx = 0;
    for (const auto& s : bundle.value("solutions", json::array())) {
        if (!s.contains("series")) continue;
        GeneralizedSeries series = series_from_json(s["series"]);
        os << "# solution " << sol_idx << " samples on the positive ray\n";
        os << "t";
        for (int e = 0; e < series.coeff_rows() * series.coeff_cols(); ++e) os << ",re_" << e << ",im_" << e;
        os << "\n";
        for (int k = 1; k <= 50; ++k) {
            const double t = double(k) / 50.0;
            Mat v = evaluate(series, cplx(t));
            os << csv_num(t);
            for (int i = 0; i < v.rows(); ++i)
                for (int j = 0; j < v.cols(); ++j)
                    os << "," << csv_num(v(i, j).real()) << "," << csv_num(v(i, j).imag());
            os << "\n";
        }
        ++sol_idx;
    }
    return os.str();
}

struct ParsedArgs {
    Mode mode = Mode::Solve;
    std::string input;
    Options opts;
};

ParsedArgs parse_args(const std::vector<std::string>& args) {
    if (args.empty()) throw parse_error("usage: mfloq <mode> <problem.toml|dir> [flags]");
    ParsedArgs pa;
    pa.mode = mode_from_string(args[0]);
    size_t i = 1;
    if (i >= args.size() || args[i].rfind("--", 0) == 0) throw parse_error("missing input path");
    pa.input = args[i++];
    auto need_value = [&](const std::string& flag) -> std::string {
        if (i >= args.size()) throw parse_error(flag + " expects a value");
        return args[i++];
    };
    while (i < args.size()) {
        const std::string a = args[i++];
        if (a == "--out") {
            pa.opts.out = need_value(a);
        } else if (a == "--pmax") {
            pa.opts.pmax_override = std::stol(need_value(a));
        } else if (a == "--trunc") {
            pa.opts.trunc_override = std::stoi(need_value(a));
        } else if (a == "--tol") {
            pa.opts.tol_override = std::stod(need_value(a));
        } else if (a == "--region") {
            const std::string v = need_value(a);
            Region r;
            if (std::sscanf(v.c_str(), "%lf,%lf,%lf,%lf", &r.re0, &r.re1, &r.im0, &r.im1) != 4)
                throw parse_error("--region expects re0,re1,im0,im1");
            pa.opts.region_override = r;
        } else if (a == "--csv") {
            pa.opts.csv = true;
        } else if (a == "--quiet") {
            pa.opts.quiet = true;
        } else if (a == "--timing") {
            pa.opts.timing = true;
        } else {
            throw parse_error("unknown flag '" + a + "'");
        }
    }
    return pa;
}

// Returns the exit code for one problem file.
int process_file(const fs::path& in, const fs::path& out_stem, Mode mode, const Options& opts, std::ostream& out) {
    json bundle;
    int code = 0;
    try {
        ProblemFile p = parse_problem_file(in.string());
        p.mode = mode;
        bundle = run_problem(p, opts);
        if (bundle["status"] == "hypothesis_failed") code = 2;
    } catch (const error& e) {
        bundle = json{{"error", json{{"type", error_type_name(e)}, {"message", e.what()}}}};
        code = 1;
    }
    write_text_atomic(out_stem.string() + ".json", bundle.dump(2) + "\n");
    if (code != 1) {
        if (opts.csv) {
            const std::string cc = coeffs_csv(bundle);
            if (!cc.empty()) write_text_atomic(out_stem.string() + ".coeffs.csv", cc);
            const std::string ec = eval_csv(bundle);
            if (!ec.empty()) write_text_atomic(out_stem.string() + ".eval.csv", ec);
        }
        if (!opts.quiet) out << format_report(bundle);
    } else if (!opts.quiet) {
        out << "error (" << bundle["error"]["type"].get<std::string>()
            << "): " << bundle["error"]["message"].get<std::string>() << "\n";
    }
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    ParsedArgs pa;
    try {
        pa = parse_args(args);
    } catch (const error& e) {
        err << "mfloq: " << e.what() << "\n";
        return 1;
    }
    try {
        const fs::path input(pa.input);
        if (fs::is_directory(input)) {
            // Batch: every .toml processed independently, outputs never interleave.
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(input))
                if (entry.path().extension() == ".toml") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            const fs::path out_dir = pa.opts.out.empty() ? input : fs::path(pa.opts.out);
            fs::create_directories(out_dir);
            bool any_hard = false, any_hyp = false;
            for (const auto& f : files) {
                const int code = process_file(f, out_dir / f.stem(), pa.mode, pa.opts, out);
                any_hard = any_hard || code == 1;
                any_hyp = any_hyp || code == 2;
            }
            return any_hard ? 1 : (any_hyp ? 2 : 0);
        }
        if (!fs::exists(input)) {
            err << "mfloq: input '" << pa.input << "' does not exist\n";
            return 1;
        }
        fs::path stem = pa.opts.out.empty() ? input.parent_path() / input.stem() : fs::path(pa.opts.out);
        return process_file(input, stem, pa.mode, pa.opts, out);
    } catch (const std::exception& e) {
        err << "mfloq: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mfloq::cli
