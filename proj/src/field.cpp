#include "pxsys/field.hpp"

#include <cmath>

#include "pxsys/errors.hpp"

namespace pxsys {

ScalarField::ScalarField(const Mesh& m, double value, bool w0)
    : mesh(&m), values(m.n_nodes(), value), zero_boundary(w0) {
    if (w0)
        for (int b : m.boundary) values[b] = 0.0;
}

ScalarField::ScalarField(const Mesh& m, std::vector<double> vals, bool w0)
    : mesh(&m), values(std::move(vals)), zero_boundary(w0) {
    if (static_cast<int>(values.size()) != m.n_nodes())
        throw Error(ErrorKind::InvalidParam, "field value count does not match node count");
    if (w0)
        for (int b : m.boundary) values[b] = 0.0;
}

double ScalarField::at_barycenter(int e) const {
    const int nv = mesh->verts_per_elem();
    double s = 0.0;
    for (int k = 0; k < nv; ++k) s += values[mesh->elements[e][k]];
    return s / nv;
}

double sup_norm(const ScalarField& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

double sup_diff(const ScalarField& u, const ScalarField& v) {
    if (u.values.size() != v.values.size())
        throw Error(ErrorKind::MeshMismatch, "sup_diff: field sizes differ");
    double m = 0.0;
    for (size_t i = 0; i < u.values.size(); ++i) m = std::max(m, std::abs(u.values[i] - v.values[i]));
    return m;
}

ScalarField restrict_field(const ScalarField& field, const Mesh& sub, const Mesh& super) {
    if (field.mesh != &super)
        throw Error(ErrorKind::MeshMismatch, "restrict_field: field not on the super mesh");
    const std::vector<int> map = restriction_map(sub, super);
    std::vector<double> vals(sub.n_nodes());
    for (int i = 0; i < sub.n_nodes(); ++i) vals[i] = field.values[map[i]];
    return ScalarField(sub, std::move(vals));
}

}  // namespace pxsys
