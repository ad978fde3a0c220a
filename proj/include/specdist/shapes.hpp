#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "specdist/mesh.hpp"
#include "specdist/rng.hpp"

namespace specdist {

/** Icosahedron subdivided `subdivisions` times, projected to a sphere of the
 *  given radius. Vertex count: 10 * 4^s + 2 (12, 42, 162, 642, 2562, ...). */
inline TriMesh make_icosphere(int subdivisions, double radius = 1.0) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (auto& v : verts) v.normalize();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find({key.first, key.second});
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d m = (verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized();
            verts.push_back(m);
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint[{key.first, key.second}] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t v = 0; v < verts.size(); ++v) mesh.vertices.row(static_cast<Eigen::Index>(v)) = radius * verts[v];
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f)
        for (int c = 0; c < 3; ++c) mesh.faces(static_cast<Eigen::Index>(f), c) = faces[f][static_cast<std::size_t>(c)];
    return mesh;
}

/** Latitude/longitude sphere: (rings-1)*segments + 2 vertices. */
inline TriMesh make_uv_sphere(int rings, int segments, double radius = 1.0) {
    const double pi = std::numbers::pi;
    std::vector<Eigen::Vector3d> verts;
    verts.emplace_back(0, 0, radius);  // north pole
    for (int r = 1; r < rings; ++r) {
        double theta = pi * r / rings;
        for (int s = 0; s < segments; ++s) {
            double phi = 2.0 * pi * s / segments;
            verts.emplace_back(radius * std::sin(theta) * std::cos(phi),
                               radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta));
        }
    }
    verts.emplace_back(0, 0, -radius);  // south pole
    auto ring_vertex = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    std::vector<std::array<int, 3>> faces;
    for (int s = 0; s < segments; ++s)
        faces.push_back({0, ring_vertex(1, s), ring_vertex(1, s + 1)});
    for (int r = 1; r + 1 < rings; ++r) {
        for (int s = 0; s < segments; ++s) {
            int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
            int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
            faces.push_back({a, c, d});
            faces.push_back({a, d, b});
        }
    }
    int south = static_cast<int>(verts.size()) - 1;
    for (int s = 0; s < segments; ++s)
        faces.push_back({south, ring_vertex(rings - 1, s + 1), ring_vertex(rings - 1, s)});

    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t v = 0; v < verts.size(); ++v) mesh.vertices.row(static_cast<Eigen::Index>(v)) = verts[v];
    mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
    for (std::size_t f = 0; f < faces.size(); ++f)
        for (int c = 0; c < 3; ++c) mesh.faces(static_cast<Eigen::Index>(f), c) = faces[f][static_cast<std::size_t>(c)];
    return mesh;
}

/** Closed torus with major_segments × minor_segments vertices, all valence 6. */
inline TriMesh make_torus(int major_segments, int minor_segments, double major_radius = 1.0,
                          double minor_radius = 0.35) {
    const double pi = std::numbers::pi;
    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(major_segments) * minor_segments, 3);
    auto vid = [&](int u, int v) {
        return ((u % major_segments + major_segments) % major_segments) * minor_segments +
               ((v % minor_segments + minor_segments) % minor_segments);
    };
    for (int u = 0; u < major_segments; ++u) {
        double a = 2.0 * pi * u / major_segments;
        for (int v = 0; v < minor_segments; ++v) {
            double b = 2.0 * pi * v / minor_segments;
            double r = major_radius + minor_radius * std::cos(b);
            mesh.vertices.row(vid(u, v)) << r * std::cos(a), r * std::sin(a), minor_radius * std::sin(b);
        }
    }
    mesh.faces.resize(static_cast<Eigen::Index>(2) * major_segments * minor_segments, 3);
    int f = 0;
    for (int u = 0; u < major_segments; ++u) {
        for (int v = 0; v < minor_segments; ++v) {
            int a = vid(u, v), b = vid(u + 1, v), c = vid(u + 1, v + 1), d = vid(u, v + 1);
            mesh.faces.row(f++) << a, b, c;
            mesh.faces.row(f++) << a, c, d;
        }
    }
    return mesh;
}

/** Planar triangulated grid of the rectangle [0,w]×[0,h] with (nx+1)*(ny+1)
 *  vertices; squares split along alternating diagonals. */
inline TriMesh make_grid_mesh(int nx, int ny, double w = 1.0, double h = 1.0) {
    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(nx + 1) * (ny + 1), 3);
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.row(vid(i, j)) << w * i / nx, h * j / ny, 0.0;
    mesh.faces.resize(static_cast<Eigen::Index>(2) * nx * ny, 3);
    int f = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            if ((i + j) % 2 == 0) {
                mesh.faces.row(f++) << a, b, c;
                mesh.faces.row(f++) << a, c, d;
            } else {
                mesh.faces.row(f++) << a, b, d;
                mesh.faces.row(f++) << b, c, d;
            }
        }
    }
    return mesh;
}

/** Path graph 0-1-...-(n-1) with unit (or given) edge weights. */
inline WeightedGraph make_path_graph(int n, double weight = 1.0) {
    std::vector<GraphEdge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weight});
    return WeightedGraph(n, std::move(edges));
}

/** n uniform points in [0,1]^dim, row per point. */
inline Eigen::MatrixXd random_points_uniform(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d) pts(i, d) = rng.uniform();
    return pts;
}

/** Symmetrized k-nearest-neighbor graph of a point set, Euclidean weights. */
inline WeightedGraph make_knn_graph(const Eigen::MatrixXd& points, int k_neighbors) {
    const int n = static_cast<int>(points.rows());
    if (k_neighbors < 1 || k_neighbors >= n) throw InvalidArgument("k_neighbors out of range");
    std::map<std::pair<int, int>, double> edge_set;
    std::vector<std::pair<double, int>> dists(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            dists[static_cast<std::size_t>(j)] = {(points.row(i) - points.row(j)).norm(), j};
        std::partial_sort(dists.begin(), dists.begin() + k_neighbors + 1, dists.end());
        for (int m = 0; m <= k_neighbors; ++m) {
            int j = dists[static_cast<std::size_t>(m)].second;
            if (j == i) continue;
            auto key = std::minmax(i, j);
            edge_set[{key.first, key.second}] = dists[static_cast<std::size_t>(m)].first;
        }
    }
    std::vector<GraphEdge> edges;
    edges.reserve(edge_set.size());
    for (const auto& [key, w] : edge_set) edges.push_back({key.first, key.second, w});
    return WeightedGraph(n, std::move(edges));
}

/** Random connected graph for property tests: a random spanning tree plus
 *  `extra_edges` random chords, weights uniform in [0.1, 2). */
inline WeightedGraph make_random_connected_graph(int n, int extra_edges, std::uint64_t seed) {
    Rng rng(seed);
    std::map<std::pair<int, int>, double> edge_set;
    for (int v = 1; v < n; ++v) {
        int u = rng.uniform_index(v);
        edge_set[{u, v}] = rng.uniform(0.1, 2.0);
    }
    for (int m = 0; m < extra_edges; ++m) {
        int a = rng.uniform_index(n), b = rng.uniform_index(n);
        if (a == b) continue;
        auto key = std::minmax(a, b);
        if (!edge_set.count({key.first, key.second}))
            edge_set[{key.first, key.second}] = rng.uniform(0.1, 2.0);
    }
    std::vector<GraphEdge> edges;
    for (const auto& [key, w] : edge_set) edges.push_back({key.first, key.second, w});
    return WeightedGraph(n, std::move(edges));
}

}  // namespace specdist
