#include <doctest.h>

#include <cmath>

#include "pxsys/errors.hpp"
#include "pxsys/field.hpp"
#include "pxsys/mesh.hpp"

using namespace pxsys;

TEST_CASE("interval mesh layout") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    CHECK(m.n_nodes() == 5);
    CHECK(m.n_elements() == 4);
    CHECK(m.nodes[1][0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.boundary == std::vector<int>{0, 4});
    CHECK(m.dist[1] == doctest::Approx(0.25).epsilon(1e-15));

    const Mesh m2 = build_interval_mesh(0.0, 1.0, 2);
    CHECK(m2.interior == std::vector<int>{1});
    CHECK(m2.dist[1] == doctest::Approx(0.5));

    CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 1), Error);
    CHECK_THROWS_AS(build_interval_mesh(1.0, 0.0, 4), Error);
}

TEST_CASE("rectangle mesh layout") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 2, 2);
    CHECK(m.n_nodes() == 9);
    CHECK(m.n_elements() == 8);
    CHECK(m.boundary.size() == 8);
    // exact distances
    for (int i = 0; i < m.n_nodes(); ++i) {
        const double x = m.nodes[i][0], y = m.nodes[i][1];
        const double d = std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
        CHECK(m.dist[i] == doctest::Approx(d).epsilon(1e-14));
    }
    int center = -1;
    for (int i = 0; i < m.n_nodes(); ++i)
        if (m.nodes[i][0] == 0.5 && m.nodes[i][1] == 0.5) center = i;
    REQUIRE(center >= 0);
    CHECK(m.dist[center] == doctest::Approx(0.5));

    CHECK_THROWS_AS(build_rectangle_mesh(0.0, 1.0, 2, 2), Error);
}

TEST_CASE("distance at an off-center rectangle point") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 4, 2);
    for (int i = 0; i < m.n_nodes(); ++i)
        if (m.nodes[i][0] == 0.25 && m.nodes[i][1] == 0.5)
            CHECK(m.dist[i] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("quadrature integrates constants exactly") {
    for (const Mesh& m : {build_interval_mesh(0.0, 1.0, 7), build_rectangle_mesh(2.0, 0.5, 3, 5)}) {
        const QuadratureRule rule = QuadratureRule::midpoint(m.dim);
        CHECK(rule.valid());
        const double total = integrate(m, rule, [](int, const std::array<double, 2>&) { return 1.0; });
        CHECK(total == doctest::Approx(m.total_measure()).epsilon(1e-12));
        CHECK(m.total_measure() == doctest::Approx(m.dim == 1 ? 1.0 : 1.0).epsilon(1e-12));
    }
}

TEST_CASE("enlarge_domain nests the original nodes") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    const Mesh big = enlarge_domain(m, 0.5);
    CHECK(big.margin == doctest::Approx(0.5));
    CHECK(big.lo[0] == doctest::Approx(-0.5));
    CHECK(big.hi[0] == doctest::Approx(1.5));
    const std::vector<int> map = restriction_map(m, big);
    for (int i = 0; i < m.n_nodes(); ++i) {
        CHECK(big.nodes[map[i]][0] == m.nodes[i][0]);
        CHECK(!big.is_boundary[map[i]]);
        CHECK(big.dist[map[i]] == doctest::Approx(m.dist[i] + 0.5).epsilon(1e-14));
    }
    // d~ at the old boundary equals the margin
    CHECK(big.dist[map[0]] == doctest::Approx(0.5));

    const Mesh r = build_rectangle_mesh(1.0, 1.0, 2, 2);
    const Mesh rbig = enlarge_domain(r, 0.25);
    CHECK(rbig.lo[0] == doctest::Approx(-0.25));
    CHECK(rbig.hi[1] == doctest::Approx(1.25));
    const std::vector<int> rmap = restriction_map(r, rbig);
    for (int i = 0; i < r.n_nodes(); ++i) CHECK(rbig.dist[rmap[i]] >= 0.25 - 1e-14);
}

TEST_CASE("mesh json round trip") {
    const Mesh m = build_rectangle_mesh(1.0, 2.0, 2, 3);
    const Mesh back = Mesh::from_json(m.to_json());
    CHECK(back.n_nodes() == m.n_nodes());
    CHECK(back.n_elements() == m.n_elements());
    for (int i = 0; i < m.n_nodes(); ++i) {
        CHECK(back.nodes[i][0] == m.nodes[i][0]);
        CHECK(back.dist[i] == m.dist[i]);
        CHECK(back.is_boundary[i] == m.is_boundary[i]);
    }
    for (int e = 0; e < m.n_elements(); ++e)
        CHECK(back.measure[e] == doctest::Approx(m.measure[e]).epsilon(1e-15));
}

TEST_CASE("field restriction picks matching nodes") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    const Mesh big = enlarge_domain(m, 0.25);
    std::vector<double> vals(big.n_nodes());
    for (int i = 0; i < big.n_nodes(); ++i) vals[i] = big.nodes[i][0] * 2.0;
    const ScalarField f(big, vals);
    const ScalarField r = restrict_field(f, m, big);
    for (int i = 0; i < m.n_nodes(); ++i) CHECK(r.values[i] == 2.0 * m.nodes[i][0]);
}
