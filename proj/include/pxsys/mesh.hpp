#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pxsys {

/// Simplicial mesh of an interval (dim 1) or an axis-aligned rectangle
/// (dim 2, structured triangulation). Immutable after construction.
struct Mesh {
    int dim = 1;
    std::vector<std::array<double, 2>> nodes;    // y = 0 for 1D meshes
    std::vector<std::array<int, 3>> elements;    // third index = -1 for segments
    std::vector<int> boundary;                   // sorted boundary node ids
    std::vector<int> interior;                   // sorted interior node ids
    std::vector<char> is_boundary;               // per node
    std::vector<double> measure;                 // per element (length / area)
    std::vector<double> dist;                    // per node, dist(x, boundary)
    double margin = 0.0;                         // delta' when built by enlarge_domain
    std::array<double, 2> lo{0.0, 0.0};          // domain bounding box (exact)
    std::array<double, 2> hi{0.0, 0.0};

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }
    int verts_per_elem() const { return dim + 1; }
    double total_measure() const;
    double inradius() const;
    std::array<double, 2> barycenter(int e) const;

    nlohmann::json to_json() const;
    static Mesh from_json(const nlohmann::json& j);
};

Mesh build_interval_mesh(double a, double b, int n);
Mesh build_rectangle_mesh(double extent_x, double extent_y, int nx, int ny);

/// Grown domain for barrier constructions: every node of `mesh` appears at the
/// same coordinates in the result, and the result records margin = dist of the
/// two boundaries.
Mesh enlarge_domain(const Mesh& mesh, double margin);

/// For each node of `sub`, the index of the node with identical coordinates in
/// `super`. Throws if a node is missing.
std::vector<int> restriction_map(const Mesh& sub, const Mesh& super);

/// Per-element quadrature in barycentric coordinates; weights sum to 1 and are
/// scaled by the element measure when integrating.
struct QuadratureRule {
    std::vector<std::vector<double>> points;  // barycentric, size dim+1 each
    std::vector<double> weights;

    static QuadratureRule midpoint(int dim);
    bool valid() const;
};

/// Integrates f over the mesh; f receives the element id and physical point.
double integrate(const Mesh& mesh, const QuadratureRule& rule,
                 const std::function<double(int, const std::array<double, 2>&)>& f);

}  // namespace pxsys
