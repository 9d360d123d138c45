#include <doctest.h>

#include <cmath>

#include "pxsys/errors.hpp"
#include "pxsys/exponent.hpp"
#include "pxsys/params.hpp"

using namespace pxsys;

namespace {

SystemParams make_params(const Mesh& m, double p, double q, double a, double b, double gamma = 1.0,
                         double theta = 1.0) {
    SystemParams params;
    params.gamma = gamma;
    params.theta = theta;
    params.p = ExponentField::constant(m, p);
    params.q = ExponentField::constant(m, q);
    params.alpha = ExponentField::constant(m, a);
    params.beta = ExponentField::constant(m, b);
    return params;
}

}  // namespace

TEST_CASE("conjugate values and involution") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    CHECK(conjugate(ExponentField::constant(m, 2.0)).values[0] == doctest::Approx(2.0));
    CHECK(conjugate(ExponentField::constant(m, 3.0)).values[0] == doctest::Approx(1.5));
    CHECK(conjugate(ExponentField::constant(m, 1.5)).values[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(conjugate(ExponentField::constant(m, 1.0)), Error);

    const ExponentField p = ExponentField::affine(m, 1.5, 0.9);
    const ExponentField pcc = conjugate(conjugate(p));
    for (int i = 0; i < m.n_nodes(); ++i)
        CHECK(pcc.values[i] == doctest::Approx(p.values[i]).epsilon(1e-14));
}

TEST_CASE("critical exponent") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 2, 2);
    CHECK(critical(ExponentField::constant(m, 1.5), 2).values[0] == doctest::Approx(6.0));
    CHECK(critical(ExponentField::constant(m, 1.9), 2).values[0] == doctest::Approx(38.0));
    CHECK_THROWS_AS(critical(ExponentField::constant(m, 2.0), 2), Error);
    CHECK_THROWS_AS(critical(ExponentField::constant(m, 1.5), 1), Error);
}

TEST_CASE("modular on constants") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 8);
    const ExponentField p2 = ExponentField::constant(m, 2.0);
    CHECK(modular(p2, ScalarField(m, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(modular(p2, ScalarField(m, 2.0)) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(modular(p2, ScalarField(m, 0.0)) == 0.0);
}

TEST_CASE("luxemburg norm closed forms and invariants") {
    const Mesh m = build_interval_mesh(0.0, 2.0, 16);  // |Omega| = 2
    const ExponentField p3 = ExponentField::constant(m, 3.0);
    const double c = 1.7;
    CHECK(luxemburg_norm(p3, ScalarField(m, c)) ==
          doctest::Approx(c * std::pow(2.0, 1.0 / 3.0)).epsilon(1e-10));

    const Mesh u1 = build_interval_mesh(0.0, 1.0, 16);
    const ExponentField p2 = ExponentField::constant(u1, 2.0);
    CHECK(luxemburg_norm(p2, ScalarField(u1, 1.0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(luxemburg_norm(p2, ScalarField(u1, 0.0)) == 0.0);

    // norm-modular consistency and homogeneity on a non-constant field
    const ExponentField pv = ExponentField::affine(u1, 1.6, 0.8);
    std::vector<double> vals(u1.n_nodes());
    for (int i = 0; i < u1.n_nodes(); ++i) vals[i] = std::sin(3.0 * u1.nodes[i][0]) + 0.2;
    const ScalarField u(u1, vals);
    const double norm = luxemburg_norm(pv, u);
    ScalarField scaled = u;
    for (double& v : scaled.values) v /= norm;
    CHECK(modular(pv, scaled) == doctest::Approx(1.0).epsilon(1e-9));

    ScalarField times = u;
    for (double& v : times.values) v *= -3.5;
    CHECK(luxemburg_norm(pv, times) == doctest::Approx(3.5 * norm).epsilon(1e-10));

    // monotone modular in the scaling parameter
    double prev = modular(pv, u) * 8.0;  // start above
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        ScalarField s = u;
        for (double& v : s.values) v /= lam;
        const double mv = modular(pv, s);
        CHECK(mv < prev);
        prev = mv;
    }
}

TEST_CASE("hypothesis validation") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 4, 4);
    SUBCASE("H2 passes for subcritical powers") {
        const SystemParams params = make_params(m, 2.5, 2.5, 0.5, 0.5);
        const HypothesisReport rep = validate(params, Hypothesis::H2);
        CHECK(rep.pass);
        CHECK(rep.worst_margin() == doctest::Approx(0.5));  // alpha_min or 1.5 - 0.5... smallest is 0.5
    }
    SUBCASE("superlinear passes for large powers") {
        const SystemParams params = make_params(m, 2.5, 2.5, 2.0, 2.0);
        CHECK(validate(params, Hypothesis::Superlinear).pass);
        CHECK(!validate(params, Hypothesis::H2).pass);
    }
    SUBCASE("H2' fails below the e-threshold") {
        const SystemParams params = make_params(m, 3.0, 3.0, 0.3, 0.3, 1.0, 1.0);
        const HypothesisReport rep = validate(params, Hypothesis::H2Prime);
        CHECK(!rep.pass);
        // 0.3 < 1/e
        for (const auto& [name, margin] : rep.margins)
            if (name == "alpha_min_gt_ge")
                CHECK(margin == doctest::Approx(0.3 - 1.0 / std::exp(1.0)).epsilon(1e-12));
    }
    SUBCASE("H1 in 2D includes the conjugate-critical comparison") {
        const SystemParams params = make_params(m, 1.9, 1.8, 0.5, 0.5);
        const HypothesisReport rep = validate(params, Hypothesis::H1);
        CHECK(rep.pass);
        CHECK(rep.margins.size() == 6);
    }
    SUBCASE("zero margin fails strictly") {
        const SystemParams params = make_params(m, 2.5, 2.5, 1.5, 0.5);
        CHECK(!validate(params, Hypothesis::H2).pass);  // alpha+ = q- - 1 exactly
    }
    SUBCASE("unknown hypothesis id") {
        CHECK_THROWS_AS(hypothesis_from_string("H3"), Error);
    }
}
