#include "mfloq/series.hpp"

#include <cmath>

#include "doctest.h"
#include "testutil.hpp"

using namespace mfloq;
using testutil::rel_err;
using testutil::Rng;

namespace {

Mat sc(cplx v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
}

GeneralizedSeries scalar_series(cplx nu, std::initializer_list<cplx> coeffs) {
    std::vector<Mat> c;
    for (cplx v : coeffs) c.push_back(sc(v));
    return GeneralizedSeries(nu, std::move(c));
}

std::vector<MomentSequence> builtins() {
    return {MomentSequence::factorial(), MomentSequence::catalan(), MomentSequence::gamma_ratio(2.0),
            MomentSequence::gevrey(0.5), MomentSequence::q_factorial(2.0)};
}

}  // namespace

TEST_CASE("moment derivative: classical power rule") {
    GeneralizedSeries f = scalar_series(cplx(2.5), {1.0, 0.0, 0.0});
    GeneralizedSeries df = moment_derivative(f, MomentSequence::factorial());
    CHECK(std::abs(df.nu() - cplx(1.5)) < 1e-14);
    CHECK(rel_err(df.coeff(0)(0, 0), cplx(2.5)) < 1e-13);
    CHECK(df.order() == 2);
}

TEST_CASE("moment derivative maps the truncated E-series to itself") {
    for (const auto& seq : builtins()) {
        const int N = 8;
        std::vector<Mat> c;
        for (int p = 0; p <= N; ++p) c.push_back(sc(1.0 / eval_m(seq, cplx(double(p)))));
        GeneralizedSeries e(0.0, std::move(c));
        GeneralizedSeries de = moment_derivative(e, seq);
        CHECK(de.order() == N - 1);
        CHECK(std::abs(de.nu()) < 1e-14);
        for (int p = 0; p < N; ++p) CHECK(rel_err(de.coeff(p)(0, 0), e.coeff(p)(0, 0)) < 1e-12);
    }
}

TEST_CASE("moment derivative: q-case Jackson quotient on z^2") {
    const double q = 2.0;
    GeneralizedSeries f = scalar_series(cplx(2.0), {1.0});
    GeneralizedSeries df = moment_derivative(f, MomentSequence::q_factorial(q));
    // (q^2 z^2 - z^2)/((q-1) z) = (1+q) z by hand
    CHECK(rel_err(df.coeff(0)(0, 0), cplx(1.0 + q)) < 1e-13);
    CHECK(std::abs(df.nu() - cplx(1.0)) < 1e-14);
}

TEST_CASE("moment derivative rejects exponents outside both branches") {
    GeneralizedSeries f = scalar_series(cplx(0.5), {1.0});
    CHECK_THROWS_AS(moment_derivative(f, MomentSequence::factorial()), domain_error);
}

TEST_CASE("exponent lowering: output lives in z^{nu-1} C[[z]]") {
    Rng rng(8);
    for (const auto& seq : builtins())
        for (int t = 0; t < 5; ++t) {
            const cplx nu(rng.uniform(1.0, 4.0), rng.uniform(-1.0, 1.0));
            GeneralizedSeries f = scalar_series(nu, {rng.csample(), rng.csample(), rng.csample()});
            CHECK(std::abs(moment_derivative(f, seq).nu() - (nu - 1.0)) < 1e-14);
        }
}

TEST_CASE("moment derivative is linear, coefficientwise") {
    Rng rng(9);
    const MomentSequence seq = MomentSequence::catalan();
    const cplx nu(1.7, 0.4);
    GeneralizedSeries f = scalar_series(nu, {rng.csample(), rng.csample(), rng.csample()});
    GeneralizedSeries g = scalar_series(nu, {rng.csample(), rng.csample(), rng.csample()});
    const cplx a = rng.csample(), b = rng.csample();
    GeneralizedSeries lhs = moment_derivative(add(scale(a, f), scale(b, g)), seq);
    GeneralizedSeries rhs = add(scale(a, moment_derivative(f, seq)), scale(b, moment_derivative(g, seq)));
    for (int p = 0; p <= lhs.order(); ++p) CHECK(std::abs(lhs.coeff(p)(0, 0) - rhs.coeff(p)(0, 0)) < 1e-13);
}

TEST_CASE("integer-exponent consistency of the two derivative paths") {
    CHECK(integer_nu_consistency(scalar_series(3.0, {1.0}), MomentSequence::factorial()));
    CHECK(integer_nu_consistency(scalar_series(2.0, {1.0, 1.0, 1.0}), MomentSequence::catalan()));
    CHECK(integer_nu_consistency(scalar_series(1.0, {1.0, 5.0}), MomentSequence::q_factorial(2.0)));
    Rng rng(10);
    for (const auto& seq : builtins())
        for (int t = 0; t < 20; ++t) {
            const cplx nu(double(1 + t % 5));
            std::vector<Mat> c;
            for (int p = 0; p <= 4; ++p) c.push_back(sc(rng.csample()));
            CHECK(integer_nu_consistency(GeneralizedSeries(nu, std::move(c)), seq));
        }
}

TEST_CASE("cauchy product: identity, scalar example, exponential check") {
    {
        std::vector<Mat> hc{Mat::identity(2), Mat(2, 2), Mat(2, 2)};
        GeneralizedSeries h(0.0, std::move(hc));
        std::vector<Mat> yc{Mat::col_vector({1.0, 2.0}), Mat::col_vector({0.5, -1.0}), Mat::col_vector({0.0, 3.0})};
        GeneralizedSeries y(cplx(1.3), std::move(yc));
        GeneralizedSeries prod = cauchy_product(h, y);
        for (int p = 0; p <= 2; ++p) CHECK(one_norm(prod.coeff(p) - y.coeff(p)) < 1e-15);
    }
    {
        // (1 + z) * z^mu (1 + z) = z^mu (1 + 2z + z^2)
        GeneralizedSeries h = scalar_series(0.0, {1.0, 1.0, 0.0});
        GeneralizedSeries y = scalar_series(cplx(0.7), {1.0, 1.0, 0.0});
        GeneralizedSeries prod = cauchy_product(h, y);
        CHECK(std::abs(prod.coeff(0)(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(prod.coeff(1)(0, 0) - 2.0) < 1e-15);
        CHECK(std::abs(prod.coeff(2)(0, 0) - 1.0) < 1e-15);
    }
    {
        // h with h0=I, h1=lambda I matches the first-order expansion of e^{lambda z} y
        const cplx lambda(0.8, -0.2);
        std::vector<Mat> hc{Mat::identity(1), Mat::identity(1) * lambda};
        GeneralizedSeries h(0.0, std::move(hc));
        GeneralizedSeries y = scalar_series(cplx(2.0), {1.0, 0.3});
        GeneralizedSeries prod = cauchy_product(h, y);
        CHECK(std::abs(prod.coeff(1)(0, 0) - (lambda * 1.0 + 0.3)) < 1e-15);
    }
    CHECK_THROWS_AS(cauchy_product(scalar_series(1.0, {1.0}), scalar_series(0.0, {1.0})), domain_error);
}

TEST_CASE("cauchy product distributes and respects scalar factors") {
    Rng rng(11);
    auto rsc = [&](int n) {
        std::vector<Mat> c;
        for (int p = 0; p < n; ++p) c.push_back(sc(rng.csample()));
        return GeneralizedSeries(0.0, std::move(c));
    };
    GeneralizedSeries h = rsc(5);
    GeneralizedSeries y1 = rsc(5);
    GeneralizedSeries y2 = rsc(5);
    const cplx s = rng.csample();
    GeneralizedSeries lhs = cauchy_product(h, add(y1, scale(s, y2)));
    GeneralizedSeries rhs = add(cauchy_product(h, y1), scale(s, cauchy_product(h, y2)));
    for (int p = 0; p <= lhs.order(); ++p) CHECK(std::abs(lhs.coeff(p)(0, 0) - rhs.coeff(p)(0, 0)) < 1e-14);
}

TEST_CASE("series evaluation") {
    CHECK(rel_err(evaluate(scalar_series(2.0, {1.0}), cplx(3.0))(0, 0), cplx(9.0)) < 1e-14);
    CHECK(rel_err(evaluate(scalar_series(0.5, {1.0}), cplx(4.0))(0, 0), cplx(2.0)) < 1e-14);
    CHECK_THROWS_AS(evaluate(scalar_series(0.5, {1.0}), cplx(-1.0)), branch_cut_error);
    CHECK_THROWS_AS(evaluate(scalar_series(0.5, {1.0}), cplx(0.0)), branch_cut_error);
}

TEST_CASE("series addition with integer realignment") {
    GeneralizedSeries a = scalar_series(cplx(1.5), {1.0, 2.0, 3.0});
    GeneralizedSeries b = scalar_series(cplx(2.5), {10.0, 20.0});
    GeneralizedSeries s = add(a, b);
    CHECK(std::abs(s.nu() - cplx(1.5)) < 1e-14);
    CHECK(std::abs(s.coeff(0)(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(s.coeff(1)(0, 0) - 12.0) < 1e-15);
    CHECK(std::abs(s.coeff(2)(0, 0) - 23.0) < 1e-15);
    CHECK_THROWS_AS(add(a, scalar_series(cplx(1.2), {1.0})), domain_error);
}

TEST_CASE("log-power derivative: chain structure") {
    const cplx mu(1.9, 0.4);
    {
        LogPowerSolution f = LogPowerSolution::power(mu);  // z^mu
        LogPowerSolution d = classical_derivative_logpower(f);
        CHECK(d.max_log_power() == 0);
        CHECK(std::abs(d.term(0, 0) - mu) < 1e-15);
    }
    {
        // z H2' = mu H2 + H1 with H2 = z^mu log z, H1 = z^mu
        LogPowerSolution h2(mu, {{}, {cplx(1.0)}});
        LogPowerSolution d = classical_derivative_logpower(h2);
        CHECK(std::abs(d.term(1, 0) - mu) < 1e-15);
        CHECK(std::abs(d.term(0, 0) - 1.0) < 1e-15);
    }
    {
        // f = z^mu log^2 z / 2: z f' = mu f + z^mu log z exactly
        LogPowerSolution f(mu, {{}, {}, {cplx(0.5)}});
        LogPowerSolution d = classical_derivative_logpower(f);
        LogPowerSolution expect = add(scale(mu, f), LogPowerSolution(mu, {{}, {cplx(1.0)}}));
        for (int k = 0; k <= 2; ++k)
            for (int j = 0; j <= 0; ++j) CHECK(std::abs(d.term(k, j) - expect.term(k, j)) < 1e-15);
    }
}

TEST_CASE("log-power derivative agrees with a finite-difference oracle") {
    Rng rng(12);
    const cplx mu(1.3, -0.6);
    LogPowerSolution f(mu, {{rng.csample(), rng.csample()}, {rng.csample()}, {cplx(0.25)}});
    LogPowerSolution d = classical_derivative_logpower(f);
    for (int t = 0; t < 8; ++t) {
        const cplx z = std::polar(rng.uniform(0.5, 2.0), rng.uniform(-2.5, 2.5));
        const double h = 1e-6;
        const cplx num = (evaluate(f, z * (1.0 + h)) - evaluate(f, z * (1.0 - h))) / (2.0 * h);
        CHECK(std::abs(evaluate(d, z) - num) < 1e-6 * (1.0 + std::abs(num)));
    }
}

TEST_CASE("factorial moment derivative concurs with the symbolic derivative on pure powers") {
    const MomentSequence f = MomentSequence::factorial();
    Rng rng(13);
    for (int t = 0; t < 10; ++t) {
        const cplx mu(rng.uniform(1.0, 5.0), rng.uniform(-2.0, 2.0));
        GeneralizedSeries s = scalar_series(mu, {1.0});
        GeneralizedSeries ds = moment_derivative(s, f);
        LogPowerSolution d = classical_derivative_logpower(LogPowerSolution::power(mu));
        // z d/dz z^mu = mu z^mu, while d_m lowers the exponent: compare coefficients
        CHECK(rel_err(ds.coeff(0)(0, 0), d.term(0, 0)) < 1e-12);
    }
}

TEST_CASE("log-power evaluation at classical points") {
    // z^1 log z at z = e evaluates to e
    LogPowerSolution f(cplx(1.0), {{}, {cplx(1.0)}});
    CHECK(rel_err(evaluate(f, cplx(std::exp(1.0))), cplx(std::exp(1.0))) < 1e-13);
    CHECK_THROWS_AS(evaluate(f, cplx(-2.0)), branch_cut_error);
}
