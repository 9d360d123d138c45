#include <doctest.h>

#include <cmath>
#include <random>

#include "pxsys/errors.hpp"
#include "pxsys/pxlap.hpp"

using namespace pxsys;

namespace {

ScalarField interpolate(const Mesh& m, double (*f)(double), bool w0 = true) {
    std::vector<double> vals(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) vals[i] = f(m.nodes[i][0]);
    return ScalarField(m, std::move(vals), w0);
}

double torsion_p2(double x) { return 0.5 * x * (1.0 - x); }
double torsion_p4(double x) { return 0.75 * (1.0 - std::pow(std::abs(x), 4.0 / 3.0)); }

// sup error against the analytic solution sampled at nodes and element midpoints
double sup_error(const ScalarField& u, double (*exact)(double)) {
    const Mesh& m = *u.mesh;
    double err = 0.0;
    for (int i = 0; i < m.n_nodes(); ++i)
        err = std::max(err, std::abs(u.values[i] - exact(m.nodes[i][0])));
    for (int e = 0; e < m.n_elements(); ++e) {
        const double xm = m.barycenter(e)[0];
        err = std::max(err, std::abs(u.at_barycenter(e) - exact(xm)));
    }
    return err;
}

}  // namespace

TEST_CASE("residual basics") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 2);
    const ExponentField p2 = ExponentField::constant(m, 2.0);
    SUBCASE("zero everywhere") {
        const ScalarField r = residual(p2, ScalarField(m, 0.0, true), ScalarField(m, 0.0));
        for (double v : r.values) CHECK(v == 0.0);
    }
    SUBCASE("pure load at the middle node") {
        const ScalarField r = residual(p2, ScalarField(m, 0.0, true), ScalarField(m, 1.0));
        CHECK(r.values[1] == doctest::Approx(-0.5).epsilon(1e-15));
        CHECK(r.values[0] == 0.0);
        CHECK(r.values[2] == 0.0);
    }
}

TEST_CASE("residual of the interpolated torsion solution, independent dense assembly") {
    // independent check: for p = 2 on a uniform grid the residual at node i is
    // (-u_{i-1} + 2 u_i - u_{i+1})/h - h*f exactly
    const int n = 32;
    const Mesh m = build_interval_mesh(0.0, 1.0, n);
    const double h = 1.0 / n;
    const ExponentField p2 = ExponentField::constant(m, 2.0);
    const ScalarField u = interpolate(m, torsion_p2);
    const ScalarField r = residual(p2, u, ScalarField(m, 1.0));
    for (int i = 1; i < n; ++i) {
        const double dense =
            (-u.values[i - 1] + 2.0 * u.values[i] - u.values[i + 1]) / h - h * 1.0;
        CHECK(r.values[i] == doctest::Approx(dense).epsilon(1e-12));
        CHECK(std::abs(r.values[i]) <= 4.0 * h * h);
    }
}

TEST_CASE("jacobian") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 8);
    SUBCASE("p = 2 gives the u-independent stiffness operator") {
        const ExponentField p2 = ExponentField::constant(m, 2.0);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        ScalarField u(m, 0.0, true);
        for (int i : m.interior) u.values[i] = dist(rng);
        const auto J0 = jacobian(p2, ScalarField(m, 0.0, true), 0.0);
        const auto Ju = jacobian(p2, u, 0.0);
        CHECK((J0 - Ju).norm() == doctest::Approx(0.0).epsilon(1e-14));
        // tridiagonal stiffness row: 2/h on the diagonal
        CHECK(J0.coeff(3, 3) == doctest::Approx(16.0));
        CHECK(J0.coeff(3, 4) == doctest::Approx(-8.0));
    }
    SUBCASE("degenerate gradient and p = 4 gives the zero operator") {
        const ExponentField p4 = ExponentField::constant(m, 4.0);
        const auto J = jacobian(p4, ScalarField(m, 0.0, true), 0.0);
        CHECK(J.norm() == 0.0);
    }
    SUBCASE("finite-difference consistency") {
        const ExponentField p3 = ExponentField::constant(m, 3.0);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> dist(0.2, 1.0);
        ScalarField u(m, 0.0, true), w(m, 0.0, true);
        for (int i : m.interior) {
            u.values[i] = dist(rng) * m.nodes[i][0];
            w.values[i] = dist(rng) - 0.6;
        }
        const auto J = jacobian(p3, u, 0.0);
        const ScalarField f(m, 0.0);
        const ScalarField r0 = residual(p3, u, f);
        auto fd_error = [&](double h) {
            ScalarField up = u;
            for (int i : m.interior) up.values[i] += h * w.values[i];
            const ScalarField r1 = residual(p3, up, f);
            double err = 0.0;
            for (size_t k = 0; k < m.interior.size(); ++k) {
                const int i = m.interior[k];
                double jw = 0.0;
                for (size_t l = 0; l < m.interior.size(); ++l)
                    jw += J.coeff(static_cast<int>(k), static_cast<int>(l)) *
                          w.values[m.interior[l]];
                err = std::max(err, std::abs((r1.values[i] - r0.values[i]) / h - jw));
            }
            return err;
        };
        const double e4 = fd_error(1e-4), e5 = fd_error(1e-5), e6 = fd_error(1e-6);
        CHECK(e5 < 0.5 * e4);
        CHECK(e6 < 0.5 * e5);
        CHECK(e6 < 1e-4);
    }
}

TEST_CASE("dirichlet solve against torsion oracles") {
    SUBCASE("p = 2") {
        const Mesh m = build_interval_mesh(0.0, 1.0, 128);
        const ExponentField p = ExponentField::constant(m, 2.0);
        auto [u, rep] = solve_dirichlet(p, ScalarField(m, 1.0));
        CHECK(rep.converged);
        CHECK(sup_error(u, torsion_p2) <= 1e-3);
        double umax = 0.0;
        for (double v : u.values) umax = std::max(umax, v);
        CHECK(umax == doctest::Approx(0.125).epsilon(1e-10));
    }
    SUBCASE("p = 4 on (-1,1)") {
        const Mesh m = build_interval_mesh(-1.0, 1.0, 256);
        const ExponentField p = ExponentField::constant(m, 4.0);
        auto [u, rep] = solve_dirichlet(p, ScalarField(m, 1.0));
        CHECK(rep.converged);
        CHECK(sup_error(u, torsion_p4) <= 5e-3);
        double umax = 0.0;
        for (double v : u.values) umax = std::max(umax, v);
        CHECK(umax == doctest::Approx(0.75).epsilon(2e-3));
    }
    SUBCASE("f = 0 gives the zero solution") {
        const Mesh m = build_interval_mesh(0.0, 1.0, 16);
        const ExponentField p = ExponentField::constant(m, 3.0);
        auto [u, rep] = solve_dirichlet(p, ScalarField(m, 0.0));
        CHECK(sup_norm(u) == 0.0);
        CHECK(rep.iterations == 0);
    }
}

TEST_CASE("convergence orders over three refinements") {
    SUBCASE("p = 2 quarters") {
        std::vector<double> errs;
        for (int n : {32, 64, 128}) {
            const Mesh m = build_interval_mesh(0.0, 1.0, n);
            const ExponentField p = ExponentField::constant(m, 2.0);
            auto [u, rep] = solve_dirichlet(p, ScalarField(m, 1.0));
            errs.push_back(sup_error(u, torsion_p2));
        }
        CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.15));
        CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.15));
    }
    SUBCASE("p = 4 at least halves") {
        std::vector<double> errs;
        for (int n : {64, 128, 256}) {
            const Mesh m = build_interval_mesh(-1.0, 1.0, n);
            const ExponentField p = ExponentField::constant(m, 4.0);
            auto [u, rep] = solve_dirichlet(p, ScalarField(m, 1.0));
            errs.push_back(sup_error(u, torsion_p4));
        }
        CHECK(errs[1] < 0.55 * errs[0]);
        CHECK(errs[2] < 0.55 * errs[1]);
    }
}

TEST_CASE("homogeneity in the load for constant exponents") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 32);
    const ExponentField p = ExponentField::constant(m, 3.0);
    std::vector<double> fv(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) fv[i] = 1.0 + m.nodes[i][0];
    const ScalarField f(m, fv);
    auto [u1, r1] = solve_dirichlet(p, f);
    ScalarField cf = f;
    for (double& v : cf.values) v *= 5.0;
    auto [u5, r5] = solve_dirichlet(p, cf);
    const double scale = std::pow(5.0, 1.0 / (3.0 - 1.0));
    for (int i : m.interior)
        CHECK(u5.values[i] == doctest::Approx(scale * u1.values[i]).epsilon(1e-8));
}

TEST_CASE("weak maximum principle for nonnegative loads") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 16);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const ExponentField fields[] = {
        ExponentField::constant(m, 2.0), ExponentField::constant(m, 3.0),
        ExponentField::constant(m, 4.0), ExponentField::affine(m, 2.0, 0.5)};
    for (const ExponentField& p : fields) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> fv(m.n_nodes());
            for (double& v : fv) v = dist(rng);
            auto [u, rep] = solve_dirichlet(p, ScalarField(m, fv));
            for (double v : u.values) CHECK(v >= -1e-12);
        }
    }
}

TEST_CASE("2d p = 2 manufactured solution") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 16, 16);
    const ExponentField p = ExponentField::constant(m, 2.0);
    const double pi = std::acos(-1.0);
    std::vector<double> fv(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i)
        fv[i] = 2.0 * pi * pi * std::sin(pi * m.nodes[i][0]) * std::sin(pi * m.nodes[i][1]);
    auto [u, rep] = solve_dirichlet(p, ScalarField(m, fv));
    double err = 0.0;
    for (int i = 0; i < m.n_nodes(); ++i)
        err = std::max(err, std::abs(u.values[i] - std::sin(pi * m.nodes[i][0]) *
                                                       std::sin(pi * m.nodes[i][1])));
    CHECK(err <= 0.02);
}
