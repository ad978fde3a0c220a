#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "specdist/basis.hpp"
#include "specdist/oracles.hpp"
#include "specdist/types.hpp"

namespace specdist {

/** Greedy farthest point sampling over an arbitrary single-source distance
 *  oracle. Each added vertex maximizes the distance to the selected set;
 *  ties break to the lowest index. Deterministic. */
class FarthestPointSampler {
public:
    FarthestPointSampler(int n, std::function<Eigen::VectorXd(int)> single_source, int seed_vertex,
                         OracleKind oracle)
        : n_(n), single_source_(std::move(single_source)), oracle_(oracle) {
        SourceSet({seed_vertex}).validate(n);
        min_dist_ = Eigen::VectorXd::Constant(n, kInfinity);
        add(seed_vertex);
        std::vector<int> unreachable;
        for (int v = 0; v < n_; ++v)
            if (!std::isfinite(min_dist_[v])) unreachable.push_back(v);
        if (!unreachable.empty()) {
            std::string list;
            for (std::size_t i = 0; i < unreachable.size() && i < 8; ++i)
                list += (i ? "," : "") + std::to_string(unreachable[i]);
            if (unreachable.size() > 8) list += ",...";
            throw InvalidArgument("domain disconnected: " + std::to_string(unreachable.size()) +
                                  " vertices unreachable from seed (" + list + ")");
        }
    }

    int size() const { return static_cast<int>(vertices_.size()); }
    const std::vector<int>& vertices() const { return vertices_; }
    const std::vector<double>& cover_radii() const { return cover_radii_; }
    OracleKind oracle() const { return oracle_; }
    int seed_vertex() const { return vertices_.front(); }
    bool exhausted() const { return size() >= n_; }

    void extend_to(int count) {
        if (count > n_) throw InvalidArgument("sample count exceeds vertex count");
        while (size() < count) {
            int best = -1;
            double best_dist = -1.0;
            for (int v = 0; v < n_; ++v) {
                if (selected_[static_cast<std::size_t>(v)]) continue;
                if (min_dist_[v] > best_dist) {
                    best_dist = min_dist_[v];
                    best = v;
                }
            }
            add(best);
        }
    }

private:
    void add(int v) {
        if (selected_.empty()) selected_.assign(static_cast<std::size_t>(n_), false);
        selected_[static_cast<std::size_t>(v)] = true;
        vertices_.push_back(v);
        min_dist_ = min_dist_.cwiseMin(single_source_(v));
        double radius = 0.0;
        for (int u = 0; u < n_; ++u)
            if (!selected_[static_cast<std::size_t>(u)]) radius = std::max(radius, min_dist_[u]);
        cover_radii_.push_back(size() == n_ ? 0.0 : radius);
    }

    int n_;
    std::function<Eigen::VectorXd(int)> single_source_;
    OracleKind oracle_;
    Eigen::VectorXd min_dist_;
    std::vector<bool> selected_;
    std::vector<int> vertices_;
    std::vector<double> cover_radii_;
};

inline FarthestPointSampler make_sampler(const WeightedGraph& g, int seed_vertex,
                                         OracleKind oracle = OracleKind::dijkstra) {
    return FarthestPointSampler(
        g.num_vertices(), [&g, oracle](int v) { return oracle_distances(g, v, oracle); },
        seed_vertex, oracle);
}

/** Mesh sampler; non-FMM oracles run on the edge graph, which the returned
 *  sampler owns. */
class MeshSamplerHolder {
public:
    MeshSamplerHolder(const TriMesh& mesh, int seed_vertex, OracleKind oracle)
        : edge_graph_(oracle == OracleKind::fmm ? WeightedGraph() : mesh_to_graph(mesh)),
          sampler_(mesh.num_vertices(),
                   [&mesh, this, oracle](int v) {
                       return oracle == OracleKind::fmm
                                  ? fast_marching(mesh, SourceSet({v})).values
                                  : oracle_distances(edge_graph_, v, oracle);
                   },
                   seed_vertex, oracle) {}
    MeshSamplerHolder(const MeshSamplerHolder&) = delete;
    MeshSamplerHolder& operator=(const MeshSamplerHolder&) = delete;

    FarthestPointSampler& sampler() { return sampler_; }

private:
    WeightedGraph edge_graph_;
    FarthestPointSampler sampler_;
};

/** Gradient rows retained by a vertex sample: faces incident to sampled
 *  vertices. */
inline std::vector<int> retained_elements(const TriMesh& mesh, const std::vector<int>& verts) {
    std::vector<bool> mark(static_cast<std::size_t>(mesh.num_faces()), false);
    std::vector<bool> in_set(static_cast<std::size_t>(mesh.num_vertices()), false);
    for (int v : verts) in_set[static_cast<std::size_t>(v)] = true;
    for (int f = 0; f < mesh.num_faces(); ++f)
        for (int c = 0; c < 3; ++c)
            if (in_set[static_cast<std::size_t>(mesh.faces(f, c))]) mark[static_cast<std::size_t>(f)] = true;
    std::vector<int> out;
    for (int f = 0; f < mesh.num_faces(); ++f)
        if (mark[static_cast<std::size_t>(f)]) out.push_back(f);
    return out;
}

/** Graph counterpart: edges with at least one sampled endpoint. */
inline std::vector<int> retained_elements(const WeightedGraph& g, const std::vector<int>& verts) {
    std::vector<bool> in_set(static_cast<std::size_t>(g.num_vertices()), false);
    for (int v : verts) in_set[static_cast<std::size_t>(v)] = true;
    std::vector<int> out;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& edge = g.edges()[static_cast<std::size_t>(e)];
        if (in_set[static_cast<std::size_t>(edge.i)] || in_set[static_cast<std::size_t>(edge.j)])
            out.push_back(e);
    }
    return out;
}

namespace detail {

inline SampleSet snapshot_samples(const FarthestPointSampler& fps, const std::vector<int>& elements) {
    SampleSet s;
    s.vertices = fps.vertices();
    s.elements = elements;
    s.cover_radii = fps.cover_radii();
    s.seed_vertex = fps.seed_vertex();
    s.oracle = fps.oracle();
    return s;
}

/** sigma_min / sigma_max of the retained non-constant gradient rows. */
inline double retained_condition(const SpectralBasis& basis, const std::vector<int>& elements) {
    const int rpe = basis.rows_per_element();
    const int k_nc = basis.num_nonconstant();
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(elements.size()) * rpe, k_nc);
    for (std::size_t i = 0; i < elements.size(); ++i)
        sub.middleRows(static_cast<Eigen::Index>(i) * rpe, rpe) =
            basis.grad_phis.block(static_cast<Eigen::Index>(elements[i]) * rpe, basis.num_constant, rpe, k_nc);
    if (sub.rows() < k_nc) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(sub);
    const auto& sv = svd.singularValues();
    return sv[sv.size() - 1] <= 0.0 ? 0.0 : sv[sv.size() - 1] / sv[0];
}

}  // namespace detail

/** Extend an FPS sequence until the retained rows of grad_phis reach numerical
 *  rank k - num_constant. The sampler carries the domain and prior samples. */
template <typename Domain>
SampleSet grow_to_full_rank(const SpectralBasis& basis, const Domain& domain,
                            FarthestPointSampler& fps, double threshold = kRankThreshold) {
    const int minimum = basis.num_nonconstant();
    fps.extend_to(std::min(basis.n, std::max(fps.size(), minimum)));
    const int chunk = std::max(8, basis.k / 10);
    while (true) {
        std::vector<int> elements = retained_elements(domain, fps.vertices());
        if (detail::retained_condition(basis, elements) >= threshold)
            return detail::snapshot_samples(fps, elements);
        if (fps.exhausted())
            throw NumericalError("gradient operator rank-deficient even with all vertices sampled");
        fps.extend_to(std::min(basis.n, fps.size() + chunk));
    }
}

/** One-call FPS for a graph, including retained edges. */
inline SampleSet farthest_point_sample(const WeightedGraph& g, int count, int seed_vertex,
                                       OracleKind oracle = OracleKind::dijkstra) {
    FarthestPointSampler fps = make_sampler(g, seed_vertex, oracle);
    fps.extend_to(count);
    return detail::snapshot_samples(fps, retained_elements(g, fps.vertices()));
}

/** One-call FPS for a mesh, including retained faces. FMM is the default
 *  oracle; dijkstra runs on the edge graph. */
inline SampleSet farthest_point_sample(const TriMesh& mesh, int count, int seed_vertex,
                                       OracleKind oracle = OracleKind::fmm) {
    MeshSamplerHolder holder(mesh, seed_vertex, oracle);
    holder.sampler().extend_to(count);
    return detail::snapshot_samples(holder.sampler(),
                                    retained_elements(mesh, holder.sampler().vertices()));
}

}  // namespace specdist
