#include "mfloq/moments.hpp"

#include <cmath>

#include "doctest.h"
#include "mfloq/special.hpp"
#include "testutil.hpp"

using namespace mfloq;
using testutil::rel_err;

namespace {

// Independent oracle: Catalan numbers by exact integer arithmetic.
double catalan_oracle(int p) {
    // (2p)! / ((p+1)! p!) via the multiplicative recurrence C_{p} = C_{p-1} * 2(2p-1)/(p+1)
    double c = 1.0;
    for (int k = 1; k <= p; ++k) c = c * 2.0 * (2.0 * k - 1.0) / (k + 1.0);
    return c;
}

double q_factorial_oracle(double q, int p) {
    double r = 1.0;
    for (int j = 1; j <= p; ++j) r *= (std::pow(q, j) - 1.0) / (q - 1.0);
    return r;
}

}  // namespace

TEST_CASE("eval_m on the built-in sequences") {
    CHECK(rel_err(eval_m(MomentSequence::factorial(), cplx(4.0)), cplx(24.0)) < 1e-12);
    CHECK(rel_err(eval_m(MomentSequence::catalan(), cplx(4.0)), cplx(catalan_oracle(4))) < 1e-12);
    CHECK(catalan_oracle(4) == doctest::Approx(14.0));
    CHECK(rel_err(eval_m(MomentSequence::q_factorial(2.0), cplx(3.0)), cplx(21.0)) < 1e-10);
    CHECK_THROWS_AS(eval_m(MomentSequence::factorial(), cplx(-1.0)), domain_error);
}

TEST_CASE("ratio on the built-in sequences") {
    CHECK(rel_err(ratio(MomentSequence::factorial(), cplx(3.0)), cplx(3.0)) < 1e-12);
    // Catalan eigenvalue form 4 - 6/(z+1) at z = 2
    CHECK(rel_err(ratio(MomentSequence::catalan(), cplx(2.0)), cplx(2.0)) < 1e-12);
    // q-factorial ratio is Gamma_q(1+z)/Gamma_q(z) = (q^z - 1)/(q - 1); at z = 3, q = 2
    // this is [3]_2 = 7 = q_bracket(2, 4).
    CHECK(rel_err(ratio(MomentSequence::q_factorial(2.0), cplx(3.0)), q_bracket(2.0, cplx(4.0))) < 1e-12);
    CHECK(rel_err(ratio(MomentSequence::q_factorial(2.0), cplx(3.0)), cplx(7.0)) < 1e-12);
    CHECK_THROWS_AS(ratio(MomentSequence::factorial(), cplx(0.5)), domain_error);
}

TEST_CASE("eval_m / ratio consistency on integers") {
    struct Case {
        MomentSequence seq;
        int top;  // keep m(p) inside double range
    };
    const Case cases[] = {
        {MomentSequence::factorial(), 100},    {MomentSequence::catalan(), 100},
        {MomentSequence::gamma_ratio(2.0), 100}, {MomentSequence::gevrey(0.5), 100},
        {MomentSequence::q_factorial(2.0), 40},
    };
    for (const Case& c : cases)
        for (int p = 1; p <= c.top; ++p) {
            const cplx lhs = eval_m(c.seq, cplx(double(p))) / eval_m(c.seq, cplx(double(p) - 1.0));
            CHECK(rel_err(lhs, ratio(c.seq, cplx(double(p)))) < 1e-12);
        }
}

TEST_CASE("factorial ratio is the identity shift") {
    const MomentSequence f = MomentSequence::factorial();
    for (int p = 0; p <= 100; ++p) {
        const cplx z(double(p) + 1.0);
        CHECK(rel_err(ratio(f, z), z) < 1e-12);
    }
}

TEST_CASE("catalan eval matches the integer oracle across p") {
    const MomentSequence cat = MomentSequence::catalan();
    for (int p = 0; p <= 30; ++p) CHECK(rel_err(eval_m(cat, cplx(double(p))), cplx(catalan_oracle(p))) < 1e-11);
}

TEST_CASE("q-factorial eval matches the product oracle") {
    for (double q : {1.5, 2.0, 3.0})
        for (int p = 0; p <= 20; ++p)
            CHECK(rel_err(eval_m(MomentSequence::q_factorial(q), cplx(double(p))), cplx(q_factorial_oracle(q, p))) <
                  1e-10);
}

TEST_CASE("solve_ratio_equation on the worked examples") {
    {
        auto roots = solve_ratio_equation(MomentSequence::factorial(), cplx(2.5));
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(roots[0] - cplx(2.5)) < 1e-9);
    }
    {
        auto roots = solve_ratio_equation(MomentSequence::catalan(), cplx(2.0));
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(roots[0] - cplx(2.0)) < 1e-9);  // 4 - 6/(mu+1) = 2
    }
    {
        // (2^mu - 1)/(2 - 1) = 3  =>  mu = 2
        auto roots = solve_ratio_equation(MomentSequence::q_factorial(2.0), cplx(3.0), Region{1.0, 12.0, -4.0, 4.0});
        REQUIRE(!roots.empty());
        bool found = false;
        for (cplx r : roots) found = found || std::abs(r - cplx(2.0)) < 1e-8;
        CHECK(found);
    }
}

TEST_CASE("solve_ratio_equation returns ratio-preimages") {
    testutil::Rng rng(7);
    const MomentSequence seqs[] = {MomentSequence::factorial(), MomentSequence::catalan(),
                                   MomentSequence::gamma_ratio(2.0), MomentSequence::q_factorial(2.0)};
    for (const auto& seq : seqs)
        for (int t = 0; t < 5; ++t) {
            const cplx mu(rng.uniform(1.2, 6.0), rng.uniform(-2.0, 2.0));
            const cplx b = ratio(seq, mu);
            auto roots = solve_ratio_equation(seq, b, Region{1.0, 10.0, -5.0, 5.0});
            REQUIRE(!roots.empty());
            for (cplx r : roots) CHECK(std::abs(ratio(seq, r) - b) <= 1e-9 * (1.0 + std::abs(b)));
            bool found = false;
            for (cplx r : roots) found = found || std::abs(r - mu) < 1e-7 * (1.0 + std::abs(mu));
            CHECK(found);
        }
}

TEST_CASE("empty root list when the value is out of range") {
    // Catalan ratio stays below 4 on [1, inf); 7 has no preimage.
    auto roots = solve_ratio_equation(MomentSequence::catalan(), cplx(7.0), Region{1.0, 20.0, -5.0, 5.0});
    CHECK(roots.empty());
}

TEST_CASE("strongly regular diagnostic") {
    {
        RegularityReport r = check_strongly_regular(MomentSequence::factorial(), 50);
        CHECK(r.lc_ok);
        CHECK(r.mg_ok);
        CHECK(r.snq_ok_truncated);
        CHECK(r.snq_truncation_warning);
        CHECK(r.mg_witness_A > 1.0);
    }
    {
        RegularityReport r = check_strongly_regular(MomentSequence::gevrey(0.5), 50);
        CHECK(r.lc_ok);
        CHECK(r.mg_ok);
    }
    {
        RegularityReport r = check_strongly_regular(MomentSequence::q_factorial(2.0), 30);
        CHECK(r.lc_ok);
        CHECK_FALSE(r.mg_ok);  // q-factorials outgrow every moderate-growth witness
    }
    CHECK_THROWS_AS(check_strongly_regular(MomentSequence::factorial(), 1), domain_error);
}

TEST_CASE("custom expression sequences") {
    MomentSequence seq = MomentSequence::custom_expr("gamma(1+1/z)");
    CHECK(rel_err(eval_m(seq, cplx(1.0)), cplx(1.0)) < 1e-12);  // Gamma(2) = 1
    const cplx mu(1.5, 0.3);
    const cplx want = gamma_fn(1.0 + 1.0 / mu) / gamma_fn(1.0 + 1.0 / (mu - 1.0));
    CHECK(rel_err(ratio(seq, mu), want) < 1e-11);

    MomentSequence poly = MomentSequence::custom_expr("(1+z)^2");
    CHECK(rel_err(eval_m(poly, cplx(3.0)), cplx(16.0)) < 1e-13);
    CHECK_THROWS_AS(MomentSequence::custom_expr("gamma(1+"), parse_error);
}

TEST_CASE("table sequences are integer-only") {
    MomentSequence t = MomentSequence::custom_table({1.0, 1.0, 2.0, 5.0, 14.0});
    CHECK(rel_err(eval_m(t, cplx(3.0)), cplx(5.0)) < 1e-15);
    CHECK(rel_err(ratio(t, cplx(4.0)), cplx(14.0 / 5.0)) < 1e-15);
    CHECK_THROWS_AS(ratio(t, cplx(2.5)), domain_error);
    CHECK_THROWS_AS(eval_m(t, cplx(9.0)), domain_error);
    CHECK_THROWS_AS(MomentSequence::custom_table({1.0, -2.0}), domain_error);
}

TEST_CASE("positivity check") {
    CHECK_NOTHROW(check_positive(MomentSequence::factorial()));
    CHECK_NOTHROW(check_positive(MomentSequence::catalan()));
    CHECK_NOTHROW(check_positive(MomentSequence::q_factorial(2.0)));
}

TEST_CASE("sequence descriptors") {
    CHECK(parse_sequence_descriptor("factorial").kind() == SeqKind::Factorial);
    CHECK(parse_sequence_descriptor("catalan").kind() == SeqKind::Catalan);
    CHECK(parse_sequence_descriptor("qfactorial:q=2").q() == doctest::Approx(2.0));
    CHECK(parse_sequence_descriptor("gammaratio:alpha=2").alpha() == doctest::Approx(2.0));
    CHECK(parse_sequence_descriptor("gevrey:alpha=0.5").alpha() == doctest::Approx(0.5));
    CHECK(parse_sequence_descriptor("table:[1,1,2,5,14]").table().size() == 5);
    CHECK(parse_sequence_descriptor("expr:gamma(1+1/z)").kind() == SeqKind::CustomExpr);
    CHECK_THROWS_AS(parse_sequence_descriptor("fibonacci"), parse_error);
    CHECK_THROWS_AS(parse_sequence_descriptor("qfactorial:q=0.5"), domain_error);
}
