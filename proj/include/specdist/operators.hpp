#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "specdist/graph.hpp"
#include "specdist/mesh.hpp"
#include "specdist/types.hpp"

namespace specdist {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Cotangents are clamped to survive sliver triangles.
constexpr double kCotangentClamp = 1e4;

/** Weighted vertex degrees a_ii = sum_j w_ij. */
inline Eigen::VectorXd degree_vector(const WeightedGraph& g) {
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(g.num_vertices());
    for (const auto& e : g.edges()) {
        deg[e.i] += e.w;
        deg[e.j] += e.w;
    }
    return deg;
}

/** L_u = A - W. Symmetric positive semidefinite, zero row sums. */
inline SparseMatrix unnormalized_laplacian(const WeightedGraph& g) {
    const int n = g.num_vertices();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.edges().size() * 4);
    for (const auto& e : g.edges()) {
        trips.emplace_back(e.i, e.j, -e.w);
        trips.emplace_back(e.j, e.i, -e.w);
        trips.emplace_back(e.i, e.i, e.w);
        trips.emplace_back(e.j, e.j, e.w);
    }
    SparseMatrix L(n, n);
    L.setFromTriplets(trips.begin(), trips.end());
    L.makeCompressed();
    return L;
}

/** L_rw = I - A^{-1} W. Nonsymmetric; rows sum to zero and I - L_rw is
 *  row-stochastic. Requires positive degree at every vertex. */
inline SparseMatrix random_walk_laplacian(const WeightedGraph& g) {
    const int n = g.num_vertices();
    Eigen::VectorXd deg = degree_vector(g);
    for (int v = 0; v < n; ++v)
        if (deg[v] <= 0.0)
            throw InvalidArgument("zero degree at vertex " + std::to_string(v));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.edges().size() * 2 + static_cast<std::size_t>(n));
    for (const auto& e : g.edges()) {
        trips.emplace_back(e.i, e.j, -e.w / deg[e.i]);
        trips.emplace_back(e.j, e.i, -e.w / deg[e.j]);
    }
    for (int v = 0; v < n; ++v) trips.emplace_back(v, v, 1.0);
    SparseMatrix L(n, n);
    L.setFromTriplets(trips.begin(), trips.end());
    L.makeCompressed();
    return L;
}

struct CotangentOperators {
    SparseMatrix stiffness;   // L_c, symmetric PSD, zero row sums
    Eigen::VectorXd mass;     // lumped diagonal, m_i = 1/3 of incident triangle area
    int clamped_cotangents = 0;
    int degenerate_faces = 0;
};

/** Cotangent-weight stiffness matrix w_ij = (cot a + cot b)/2 with the lumped
 *  mass matrix; tr(mass) equals the total surface area. */
inline CotangentOperators cotangent_laplacian(const TriMesh& mesh) {
    const int n = mesh.num_vertices();
    CotangentOperators out;
    out.mass = Eigen::VectorXd::Zero(n);
    const double area_tol = kDegenerateAreaFactor * mesh.bbox_diagonal() * mesh.bbox_diagonal();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.num_faces()) * 12);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const int i0 = mesh.faces(f, 0), i1 = mesh.faces(f, 1), i2 = mesh.faces(f, 2);
        const Eigen::Vector3d p0 = mesh.vertices.row(i0);
        const Eigen::Vector3d p1 = mesh.vertices.row(i1);
        const Eigen::Vector3d p2 = mesh.vertices.row(i2);
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        if (area < area_tol) ++out.degenerate_faces;
        out.mass[i0] += area / 3.0;
        out.mass[i1] += area / 3.0;
        out.mass[i2] += area / 3.0;

        // per corner: cot of the angle, contributing half to the opposite edge
        const int idx[3] = {i0, i1, i2};
        const Eigen::Vector3d pts[3] = {p0, p1, p2};
        for (int c = 0; c < 3; ++c) {
            const Eigen::Vector3d u = pts[(c + 1) % 3] - pts[c];
            const Eigen::Vector3d v = pts[(c + 2) % 3] - pts[c];
            const double cross_norm = u.cross(v).norm();
            double cot;
            if (cross_norm <= 0.0) {
                cot = kCotangentClamp;
                ++out.clamped_cotangents;
            } else {
                cot = u.dot(v) / cross_norm;
                if (cot > kCotangentClamp || cot < -kCotangentClamp) {
                    cot = std::clamp(cot, -kCotangentClamp, kCotangentClamp);
                    ++out.clamped_cotangents;
                }
            }
            const double w = 0.5 * cot;
            const int a = idx[(c + 1) % 3], b = idx[(c + 2) % 3];
            trips.emplace_back(a, b, -w);
            trips.emplace_back(b, a, -w);
            trips.emplace_back(a, a, w);
            trips.emplace_back(b, b, w);
        }
    }
    out.stiffness.resize(n, n);
    out.stiffness.setFromTriplets(trips.begin(), trips.end());
    out.stiffness.makeCompressed();
    return out;
}

/** Discrete gradient. Mesh: a (3F)×n map from vertex functions to stacked
 *  per-face 3D gradients, constant per face; rows are ambient 3D coordinates.
 *  Graph: an |E|×n map to per-edge scalar gradients (f_i - f_j)/w_ij. */
struct GradientOperator {
    DomainKind domain = DomainKind::mesh;
    SparseMatrix op;               // (3F)×n or |E|×n
    Eigen::VectorXd face_areas;    // mesh only, size F
    Eigen::MatrixX3d face_normals; // mesh only, unit normals, F×3
    int degenerate_faces = 0;

    int rows_per_element() const { return domain == DomainKind::mesh ? 3 : 1; }
    int num_elements() const {
        return static_cast<int>(op.rows()) / rows_per_element();
    }
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return op * f; }
};

inline GradientOperator build_gradient(const TriMesh& mesh) {
    GradientOperator g;
    g.domain = DomainKind::mesh;
    const int F = mesh.num_faces();
    g.face_areas.resize(F);
    g.face_normals.resize(F, 3);
    const double area_tol = kDegenerateAreaFactor * mesh.bbox_diagonal() * mesh.bbox_diagonal();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(F) * 9);
    for (int f = 0; f < F; ++f) {
        const Eigen::Vector3d scaled_normal = mesh.face_normal_scaled(f);
        const double area = 0.5 * scaled_normal.norm();
        g.face_areas[f] = area;
        if (area < area_tol) {
            ++g.degenerate_faces;
            g.face_normals.row(f).setZero();
            continue;  // rows stay zero
        }
        const Eigen::Vector3d normal = scaled_normal / (2.0 * area);
        g.face_normals.row(f) = normal;
        for (int c = 0; c < 3; ++c) {
            // edge opposite vertex c, counterclockwise
            const Eigen::Vector3d e = mesh.vertices.row(mesh.faces(f, (c + 2) % 3)) -
                                      mesh.vertices.row(mesh.faces(f, (c + 1) % 3));
            const Eigen::Vector3d coeff = normal.cross(e) / (2.0 * area);
            for (int d = 0; d < 3; ++d) trips.emplace_back(3 * f + d, mesh.faces(f, c), coeff[d]);
        }
    }
    g.op.resize(3 * F, mesh.num_vertices());
    g.op.setFromTriplets(trips.begin(), trips.end());
    g.op.makeCompressed();
    return g;
}

inline GradientOperator build_gradient(const WeightedGraph& graph) {
    GradientOperator g;
    g.domain = DomainKind::graph;
    const int E = graph.num_edges();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(E) * 2);
    for (int e = 0; e < E; ++e) {
        const auto& edge = graph.edges()[static_cast<std::size_t>(e)];
        if (edge.w <= 0.0)
            throw InvalidArgument("zero-weight edge (" + std::to_string(edge.i) + "," +
                                  std::to_string(edge.j) + ") has no gradient");
        trips.emplace_back(e, edge.i, 1.0 / edge.w);
        trips.emplace_back(e, edge.j, -1.0 / edge.w);
    }
    g.op.resize(E, graph.num_vertices());
    g.op.setFromTriplets(trips.begin(), trips.end());
    g.op.makeCompressed();
    return g;
}

}  // namespace specdist
