#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "specdist/graph.hpp"
#include "specdist/mesh.hpp"
#include "specdist/types.hpp"

namespace specdist {

/** Exact shortest-path distances; unreachable vertices get +infinity,
 *  multiple sources take the minimum. Heap ties break on vertex index. */
inline DistanceMap dijkstra(const WeightedGraph& g, const SourceSet& sources) {
    const int n = g.num_vertices();
    sources.validate(n);
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, kInfinity);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    for (int s : sources.indices) {
        dist[s] = 0.0;
        heap.push({0.0, s});
    }
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = true;
        for (const auto& [u, w] : g.neighbors(v)) {
            double cand = d + w;
            if (cand < dist[u]) {
                dist[u] = cand;
                heap.push({cand, u});
            }
        }
    }
    DistanceMap map;
    map.values = std::move(dist);
    map.sources = sources.indices;
    map.method = "dijkstra";
    return map;
}

/** Exhaustive minimum over all simple paths. Exponential; n <= 12 only. */
inline DistanceMap brute_force(const WeightedGraph& g, int source) {
    const int n = g.num_vertices();
    if (n > 12) throw InvalidArgument("brute_force oracle limited to n <= 12");
    SourceSet({source}).validate(n);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(n, kInfinity);
    std::vector<bool> on_path(static_cast<std::size_t>(n), false);
    // depth-first over simple paths, accumulating in path order
    auto dfs = [&](auto&& self, int v, double len) -> void {
        if (len < best[v]) best[v] = len;
        on_path[static_cast<std::size_t>(v)] = true;
        for (const auto& [u, w] : g.neighbors(v))
            if (!on_path[static_cast<std::size_t>(u)]) self(self, u, len + w);
        on_path[static_cast<std::size_t>(v)] = false;
    };
    dfs(dfs, source, 0.0);
    DistanceMap map;
    map.values = std::move(best);
    map.sources = {source};
    map.method = "brute_force";
    return map;
}

namespace detail {

/** Planar two-point eikonal update: the front carries values d_a, d_b linearly
 *  along segment [A, B] and extends with unit slope; the value at C is
 *  min over p in [A,B] of interp(p) + |C - p|. The interior stationary point
 *  solves a quadratic; endpoint values subsume the one-point updates. */
inline double triangle_update(const Eigen::Vector3d& A, const Eigen::Vector3d& B,
                              const Eigen::Vector3d& C, double d_a, double d_b) {
    const Eigen::Vector3d e = B - A;
    const Eigen::Vector3d w = C - A;
    const double u = d_b - d_a;
    const double ee = e.squaredNorm();
    const double we = w.dot(e);
    const double ww = w.squaredNorm();
    auto value = [&](double s) { return d_a + s * u + (w - s * e).norm(); };
    double best = std::min(value(0.0), value(1.0));
    // f'(s) = u - (we - s*ee)/|w - s e| = 0  =>  (we - s*ee) = u*|w - s e|
    const double denom = ee * (ee - u * u);
    if (denom > 0.0) {
        const double c0 = (we * we - u * u * ww) / (ee - u * u);
        const double disc = we * we - ee * c0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double s : {(we - sq) / ee, (we + sq) / ee}) {
                if (s > 0.0 && s < 1.0 && (we - s * ee) * u >= 0.0)
                    best = std::min(best, value(s));
            }
        }
    }
    return best;
}

}  // namespace detail

/** Fast marching on a triangle mesh: eikonal |grad d| = 1 with d = 0 at the
 *  sources. Acute triangles get the two-point planar update; triangles obtuse
 *  at the update vertex fall back to one-point (edge) updates and are counted
 *  in `obtuse_updates`. */
inline DistanceMap fast_marching(const TriMesh& mesh, const SourceSet& sources,
                                 int* obtuse_updates = nullptr) {
    const int n = mesh.num_vertices();
    sources.validate(n);
    const auto incidence = mesh.vertex_face_incidence();
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, kInfinity);
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    int obtuse = 0;

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    for (int s : sources.indices) {
        dist[s] = 0.0;
        heap.push({0.0, s});
    }

    // relax vertex `x` through face `f`, using frozen values only
    auto update_vertex = [&](int x, int f) {
        int others[2];
        int cnt = 0;
        for (int c = 0; c < 3; ++c) {
            int v = mesh.faces(f, c);
            if (v != x) others[cnt++] = v;
        }
        const Eigen::Vector3d C = mesh.vertices.row(x);
        const int a = others[0], b = others[1];
        double cand = kInfinity;
        const bool a_ok = frozen[static_cast<std::size_t>(a)];
        const bool b_ok = frozen[static_cast<std::size_t>(b)];
        if (a_ok && b_ok) {
            const Eigen::Vector3d A = mesh.vertices.row(a);
            const Eigen::Vector3d B = mesh.vertices.row(b);
            if ((A - C).dot(B - C) < 0.0) {
                ++obtuse;  // obtuse at the update vertex: one-point fallback
                cand = std::min(dist[a] + (C - A).norm(), dist[b] + (C - B).norm());
            } else {
                cand = detail::triangle_update(A, B, C, dist[a], dist[b]);
            }
        } else if (a_ok) {
            cand = dist[a] + (C - Eigen::Vector3d(mesh.vertices.row(a))).norm();
        } else if (b_ok) {
            cand = dist[b] + (C - Eigen::Vector3d(mesh.vertices.row(b))).norm();
        }
        if (cand < dist[x]) {
            dist[x] = cand;
            heap.push({cand, x});
        }
    };

    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (frozen[static_cast<std::size_t>(v)]) continue;
        frozen[static_cast<std::size_t>(v)] = true;
        for (int f : incidence[static_cast<std::size_t>(v)])
            for (int c = 0; c < 3; ++c) {
                int x = mesh.faces(f, c);
                if (!frozen[static_cast<std::size_t>(x)]) update_vertex(x, f);
            }
    }

    if (obtuse_updates) *obtuse_updates = obtuse;
    DistanceMap map;
    map.values = std::move(dist);
    map.sources = sources.indices;
    map.method = "fmm";
    return map;
}

/** Single-source dispatch used by farthest point sampling. */
inline Eigen::VectorXd oracle_distances(const WeightedGraph& g, int source, OracleKind kind) {
    switch (kind) {
        case OracleKind::dijkstra: return dijkstra(g, SourceSet({source})).values;
        case OracleKind::brute_force: return brute_force(g, source).values;
        case OracleKind::fmm: throw InvalidArgument("fast marching needs a mesh domain");
    }
    throw InvalidArgument("unknown oracle");
}

inline Eigen::VectorXd oracle_distances(const TriMesh& mesh, const WeightedGraph& edge_graph,
                                        int source, OracleKind kind) {
    switch (kind) {
        case OracleKind::fmm: return fast_marching(mesh, SourceSet({source})).values;
        case OracleKind::dijkstra: return dijkstra(edge_graph, SourceSet({source})).values;
        case OracleKind::brute_force: return brute_force(edge_graph, source).values;
    }
    throw InvalidArgument("unknown oracle");
}

}  // namespace specdist
