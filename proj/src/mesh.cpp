#include "pxsys/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pxsys/errors.hpp"

namespace pxsys {

namespace {

void finalize_boundary(Mesh& m) {
    m.interior.clear();
    m.boundary.clear();
    for (int i = 0; i < m.n_nodes(); ++i) {
        if (m.is_boundary[i])
            m.boundary.push_back(i);
        else
            m.interior.push_back(i);
    }
}

double interval_dist(double x, double a, double b) { return std::min(x - a, b - x); }

double rect_dist(double x, double y, double lx0, double lx1, double ly0, double ly1) {
    return std::min(std::min(x - lx0, lx1 - x), std::min(y - ly0, ly1 - y));
}

Mesh interval_from_coords(std::vector<double> xs, double a, double b) {
    Mesh m;
    m.dim = 1;
    m.lo = {a, 0.0};
    m.hi = {b, 0.0};
    const int nn = static_cast<int>(xs.size());
    m.nodes.resize(nn);
    m.is_boundary.assign(nn, 0);
    m.dist.resize(nn);
    for (int i = 0; i < nn; ++i) {
        m.nodes[i] = {xs[i], 0.0};
        m.dist[i] = interval_dist(xs[i], a, b);
        m.is_boundary[i] = (i == 0 || i == nn - 1) ? 1 : 0;
    }
    for (int e = 0; e + 1 < nn; ++e) {
        m.elements.push_back({e, e + 1, -1});
        const double h = xs[e + 1] - xs[e];
        if (h <= 0.0) throw Error(ErrorKind::InvalidMesh, "non-positive element length");
        m.measure.push_back(h);
    }
    finalize_boundary(m);
    return m;
}

Mesh rectangle_from_grids(const std::vector<double>& xs, const std::vector<double>& ys, double lx0,
                          double lx1, double ly0, double ly1) {
    Mesh m;
    m.dim = 2;
    m.lo = {lx0, ly0};
    m.hi = {lx1, ly1};
    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());
    // lexicographic node order: x major, y minor
    auto id = [&](int i, int j) { return i * ny + j; };
    m.nodes.resize(static_cast<size_t>(nx) * ny);
    m.is_boundary.assign(m.nodes.size(), 0);
    m.dist.resize(m.nodes.size());
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const double x = xs[i], y = ys[j];
            m.nodes[id(i, j)] = {x, y};
            m.dist[id(i, j)] = rect_dist(x, y, lx0, lx1, ly0, ly1);
            m.is_boundary[id(i, j)] = (i == 0 || i == nx - 1 || j == 0 || j == ny - 1) ? 1 : 0;
        }
    }
    for (int i = 0; i + 1 < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            const double area = 0.5 * (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            if (area <= 0.0) throw Error(ErrorKind::InvalidMesh, "non-positive cell area");
            // split along the a-c diagonal; position independent so nested
            // grids triangulate identically
            m.elements.push_back({a, b, c});
            m.measure.push_back(area);
            m.elements.push_back({a, c, d});
            m.measure.push_back(area);
        }
    }
    finalize_boundary(m);
    return m;
}

std::vector<double> uniform_grid(double a, double b, int n) {
    std::vector<double> xs(n + 1);
    for (int i = 0; i <= n; ++i) xs[i] = a + (b - a) * static_cast<double>(i) / n;
    xs.front() = a;
    xs.back() = b;
    return xs;
}

// base grid plus flanks of width `margin` on both sides; flank spacing at most
// the interior average so the grown mesh is no coarser than the original
std::vector<double> extended_grid(const std::vector<double>& base, double margin) {
    const double h = (base.back() - base.front()) / static_cast<double>(base.size() - 1);
    const int k = std::max(1, static_cast<int>(std::ceil(margin / h - 1e-12)));
    std::vector<double> xs;
    xs.reserve(base.size() + 2 * k);
    for (int i = 0; i < k; ++i)
        xs.push_back((base.front() - margin) + margin * static_cast<double>(i) / k);
    xs.insert(xs.end(), base.begin(), base.end());
    for (int i = 1; i <= k; ++i) xs.push_back(base.back() + margin * static_cast<double>(i) / k);
    return xs;
}

}  // namespace

double Mesh::total_measure() const {
    double s = 0.0;
    for (double v : measure) s += v;
    return s;
}

double Mesh::inradius() const {
    if (dim == 1) return 0.5 * (hi[0] - lo[0]);
    return 0.5 * std::min(hi[0] - lo[0], hi[1] - lo[1]);
}

std::array<double, 2> Mesh::barycenter(int e) const {
    std::array<double, 2> c{0.0, 0.0};
    const int nv = verts_per_elem();
    for (int k = 0; k < nv; ++k) {
        c[0] += nodes[elements[e][k]][0];
        c[1] += nodes[elements[e][k]][1];
    }
    c[0] /= nv;
    c[1] /= nv;
    return c;
}

Mesh build_interval_mesh(double a, double b, int n) {
    if (n < 2 || a >= b) throw Error(ErrorKind::InvalidMesh, "interval mesh needs a < b, n >= 2");
    return interval_from_coords(uniform_grid(a, b, n), a, b);
}

Mesh build_rectangle_mesh(double extent_x, double extent_y, int nx, int ny) {
    if (extent_x <= 0.0 || extent_y <= 0.0 || nx < 2 || ny < 2)
        throw Error(ErrorKind::InvalidMesh, "rectangle mesh needs positive extents, nx, ny >= 2");
    return rectangle_from_grids(uniform_grid(0.0, extent_x, nx), uniform_grid(0.0, extent_y, ny),
                                0.0, extent_x, 0.0, extent_y);
}

Mesh enlarge_domain(const Mesh& mesh, double margin) {
    if (margin <= 0.0) throw Error(ErrorKind::InvalidParam, "enlarge_domain needs margin > 0");
    Mesh out;
    if (mesh.dim == 1) {
        std::vector<double> base(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i) base[i] = mesh.nodes[i][0];
        out = interval_from_coords(extended_grid(base, margin), mesh.lo[0] - margin,
                                   mesh.hi[0] + margin);
    } else {
        std::vector<double> xs, ys;
        for (const auto& nd : mesh.nodes) {
            xs.push_back(nd[0]);
            ys.push_back(nd[1]);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        out = rectangle_from_grids(extended_grid(xs, margin), extended_grid(ys, margin),
                                   mesh.lo[0] - margin, mesh.hi[0] + margin, mesh.lo[1] - margin,
                                   mesh.hi[1] + margin);
    }
    out.margin = margin;
    return out;
}

std::vector<int> restriction_map(const Mesh& sub, const Mesh& super) {
    std::map<std::pair<double, double>, int> index;
    for (int i = 0; i < super.n_nodes(); ++i)
        index[{super.nodes[i][0], super.nodes[i][1]}] = i;
    std::vector<int> map(sub.n_nodes());
    for (int i = 0; i < sub.n_nodes(); ++i) {
        auto it = index.find({sub.nodes[i][0], sub.nodes[i][1]});
        if (it == index.end())
            throw Error(ErrorKind::InvalidMesh, "restriction_map: node missing in super mesh");
        map[i] = it->second;
    }
    return map;
}

QuadratureRule QuadratureRule::midpoint(int dim) {
    QuadratureRule r;
    r.points.push_back(std::vector<double>(dim + 1, 1.0 / (dim + 1)));
    r.weights.push_back(1.0);
    return r;
}

bool QuadratureRule::valid() const {
    if (points.size() != weights.size() || points.empty()) return false;
    double s = 0.0;
    for (double w : weights) {
        if (w <= 0.0) return false;
        s += w;
    }
    return std::abs(s - 1.0) <= 1e-14;
}

double integrate(const Mesh& mesh, const QuadratureRule& rule,
                 const std::function<double(int, const std::array<double, 2>&)>& f) {
    double total = 0.0;
    const int nv = mesh.verts_per_elem();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        double elem = 0.0;
        for (size_t q = 0; q < rule.weights.size(); ++q) {
            std::array<double, 2> x{0.0, 0.0};
            for (int k = 0; k < nv; ++k) {
                x[0] += rule.points[q][k] * mesh.nodes[mesh.elements[e][k]][0];
                x[1] += rule.points[q][k] * mesh.nodes[mesh.elements[e][k]][1];
            }
            elem += rule.weights[q] * f(e, x);
        }
        total += mesh.measure[e] * elem;
    }
    return total;
}

nlohmann::json Mesh::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["margin"] = margin;
    j["lo"] = lo;
    j["hi"] = hi;
    auto& nd = j["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes) nd.push_back(dim == 1 ? nlohmann::json{n[0]} : nlohmann::json{n[0], n[1]});
    auto& el = j["elements"] = nlohmann::json::array();
    for (const auto& e : elements) {
        if (dim == 1)
            el.push_back({e[0], e[1]});
        else
            el.push_back({e[0], e[1], e[2]});
    }
    j["boundary"] = boundary;
    j["distance"] = dist;
    return j;
}

Mesh Mesh::from_json(const nlohmann::json& j) {
    Mesh m;
    m.dim = j.at("dim").get<int>();
    m.margin = j.at("margin").get<double>();
    m.lo = j.at("lo").get<std::array<double, 2>>();
    m.hi = j.at("hi").get<std::array<double, 2>>();
    for (const auto& n : j.at("nodes")) {
        std::array<double, 2> nd{n.at(0).get<double>(), m.dim == 1 ? 0.0 : n.at(1).get<double>()};
        m.nodes.push_back(nd);
    }
    for (const auto& e : j.at("elements")) {
        std::array<int, 3> el{e.at(0).get<int>(), e.at(1).get<int>(),
                              m.dim == 1 ? -1 : e.at(2).get<int>()};
        m.elements.push_back(el);
    }
    m.dist = j.at("distance").get<std::vector<double>>();
    m.is_boundary.assign(m.nodes.size(), 0);
    for (int b : j.at("boundary")) m.is_boundary[b] = 1;
    finalize_boundary(m);
    // rebuild measures from geometry
    for (const auto& e : m.elements) {
        if (m.dim == 1) {
            m.measure.push_back(m.nodes[e[1]][0] - m.nodes[e[0]][0]);
        } else {
            const auto &a = m.nodes[e[0]], &b = m.nodes[e[1]], &c = m.nodes[e[2]];
            m.measure.push_back(
                0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])));
        }
    }
    return m;
}

}  // namespace pxsys
