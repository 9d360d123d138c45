#include <doctest.h>

#include <cmath>
#include <random>

#include "pxsys/errors.hpp"
#include "pxsys/nonlin.hpp"

using namespace pxsys;

namespace {

bool bound_holds(double C, double alpha, double theta, double x) {
    return std::abs(std::log(x)) <= std::pow(x, -alpha) + C * std::pow(x, theta) + 1e-12;
}

}  // namespace

TEST_CASE("rhs evaluation") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 2);
    const ExponentField a1 = ExponentField::constant(m, 1.0);
    SUBCASE("section 4 at w = 1") {
        RhsSpec spec{1.0, 1.0, &a1, RhsFlavor::Section4, 0.0};
        const ScalarField out = eval_rhs(spec, ScalarField(m, 1.0));
        for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("section 5 at w = 0, eps = 1") {
        RhsSpec spec{1.0, 1.0, &a1, RhsFlavor::Section5, 1.0};
        const ScalarField out = eval_rhs(spec, ScalarField(m, 0.0));
        for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("section 4 at w = e with a power") {
        const ExponentField a2 = ExponentField::constant(m, 2.0);
        RhsSpec spec{1.0, 2.0, &a2, RhsFlavor::Section4, 0.0};
        const double e = std::exp(1.0);
        const ScalarField out = eval_rhs(spec, ScalarField(m, e));
        for (double v : out.values)
            CHECK(v == doctest::Approx(2.0 * e * e - 1.0).epsilon(1e-14));  // ~13.7781
    }
    SUBCASE("singular evaluation") {
        RhsSpec spec{1.0, 1.0, &a1, RhsFlavor::Section4, 0.0};
        CHECK_THROWS_AS(eval_rhs(spec, ScalarField(m, 0.0)), Error);
    }
    SUBCASE("lipschitz bound on a bounded range with eps > 0") {
        const double gamma = 0.7, theta = 1.3, eps = 0.05, R = 2.0;
        const ExponentField af = ExponentField::constant(m, 0.8);
        RhsSpec spec{gamma, theta, &af, RhsFlavor::Section5, eps};
        const double lip = gamma / eps + theta * 0.8 * std::pow(R + eps, 0.8 - 1.0) +
                           theta * 0.8 * std::pow(eps, 0.8 - 1.0);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(0.0, R);
        for (int k = 0; k < 2000; ++k) {
            const double w1 = dist(rng), w2 = dist(rng);
            if (w1 == w2) continue;
            const double f1 = eval_rhs_at(spec, 0, w1), f2 = eval_rhs_at(spec, 0, w2);
            CHECK(std::abs(f1 - f2) <= lip * std::abs(w1 - w2) + 1e-12);
        }
    }
}

TEST_CASE("logarithm bound constants") {
    SUBCASE("alpha = theta = 1") {
        const double C = log_bound_constant(1.0, 1.0);
        CHECK(C >= 0.0);
        CHECK(C <= 1.01);  // C = 1 is known to suffice
        for (double x : {1e-10, 1e-3, 0.5, 1.0, 2.0, 4.5, 1e4, 1e10})
            CHECK(bound_holds(C, 1.0, 1.0, x));
    }
    SUBCASE("random parameters validated on a fresh sample") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> par(0.1, 5.0);
        std::uniform_real_distribution<double> logx(std::log(1e-10), std::log(1e10));
        for (int rep = 0; rep < 4; ++rep) {
            const double alpha = par(rng), theta = par(rng);
            const double C = log_bound_constant(alpha, theta);
            for (int k = 0; k < 100000; ++k)
                CHECK(bound_holds(C, alpha, theta, std::exp(logx(rng))));
        }
    }
    SUBCASE("shifted bound") {
        CHECK(log_shift_bound_constant(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
        const double C = log_shift_bound_constant(0.5, 0.1);
        CHECK(C >= std::abs(std::log(0.1)));  // the x = 0 endpoint forces it
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> logx(std::log(1e-10), std::log(1e10));
        for (int k = 0; k < 100000; ++k) {
            const double x = std::exp(logx(rng));
            CHECK(std::abs(std::log(x + 0.1)) <= std::pow(x, 0.5) + C + 1e-12);
        }
        CHECK(std::abs(std::log(0.1)) <= C);
    }
}

TEST_CASE("scalar one-variable minimum") {
    SUBCASE("unit parameters") {
        const ScalarMin r = scalar_min_f(1.0, 1.0, 1.0);
        CHECK(r.x0 == doctest::Approx(1.0));
        CHECK(r.fmin == doctest::Approx(1.0));
        CHECK(r.positive);
    }
    SUBCASE("delta = 1/2") {
        const ScalarMin r = scalar_min_f(1.0, 1.0, 0.5);
        CHECK(r.x0 == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(r.fmin == doctest::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-14));
        CHECK(r.positive);
    }
    SUBCASE("below the e-threshold") {
        const ScalarMin r = scalar_min_f(1.0, 1.0, 0.3);
        CHECK(r.fmin == doctest::Approx((1.0 / 0.3) * (1.0 - std::log(1.0 / 0.3))).epsilon(1e-12));
        CHECK(r.fmin < 0.0);
        CHECK(!r.positive);
    }
    SUBCASE("grid oracle and monotone regions") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> par(0.2, 3.0);
        for (int rep = 0; rep < 5; ++rep) {
            const double gamma = par(rng), theta = par(rng), delta = par(rng);
            const ScalarMin r = scalar_min_f(gamma, theta, delta);
            auto f = [&](double x) { return theta * std::pow(x, delta) - gamma * std::log(x); };
            double gridmin = std::numeric_limits<double>::infinity();
            const int N = 2000000;
            const double l0 = std::log(1e-8), l1 = std::log(1e8);
            for (int i = 0; i < N; ++i)
                gridmin = std::min(gridmin, f(std::exp(l0 + (l1 - l0) * i / (N - 1.0))));
            CHECK(r.fmin == doctest::Approx(gridmin).epsilon(1e-6));
            // decreasing left of x0, increasing right of it
            for (double s : {0.2, 0.5, 0.9}) CHECK(f(s * r.x0) > f(std::min(1.0, s + 0.05) * r.x0));
            for (double s : {1.1, 2.0, 5.0}) CHECK(f(s * r.x0) > f(r.x0));
        }
    }
    SUBCASE("invalid delta") { CHECK_THROWS_AS(scalar_min_f(1.0, 1.0, 0.0), Error); }
}
