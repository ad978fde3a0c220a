#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>

#include "specdist/sampler.hpp"
#include "specdist/shapes.hpp"

#include "test_support.hpp"

using namespace specdist;

TEST_CASE("FPS on the unit path picks 0, 9, then the tie-broken midpoint") {
    WeightedGraph path = make_path_graph(10);
    SampleSet s = farthest_point_sample(path, 3, 0);
    REQUIRE(s.vertices == std::vector<int>{0, 9, 4});
    CHECK(s.seed_vertex == 0);
    CHECK(s.oracle == OracleKind::dijkstra);
}

TEST_CASE("FPS with count = n selects every vertex") {
    WeightedGraph path = make_path_graph(6);
    SampleSet s = farthest_point_sample(path, 6, 2);
    CHECK(s.vertices.size() == 6);
    std::vector<int> sorted = s.vertices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(s.cover_radii.back() == 0.0);
}

TEST_CASE("FPS with count = 1 returns the seed alone") {
    WeightedGraph path = make_path_graph(6);
    SampleSet s = farthest_point_sample(path, 1, 3);
    CHECK(s.vertices == std::vector<int>{3});
}

TEST_CASE("FPS is deterministic and its cover radius never increases") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        WeightedGraph g = make_random_connected_graph(40, 50, seed + 500);
        SampleSet a = farthest_point_sample(g, 15, static_cast<int>(seed % 40));
        SampleSet b = farthest_point_sample(g, 15, static_cast<int>(seed % 40));
        CHECK(a.vertices == b.vertices);
        for (std::size_t i = 1; i < a.cover_radii.size(); ++i)
            CHECK(a.cover_radii[i] <= a.cover_radii[i - 1] + 1e-12);
    }
}

TEST_CASE("FPS rejects domains not reachable from the seed") {
    WeightedGraph g(5, {{0, 1, 1.0}, {3, 4, 1.0}});
    CHECK_THROWS_WITH(farthest_point_sample(g, 3, 0),
                      Catch::Matchers::ContainsSubstring("unreachable"));
}

TEST_CASE("FPS sample count cannot exceed the vertex count") {
    WeightedGraph path = make_path_graph(5);
    CHECK_THROWS_AS(farthest_point_sample(path, 6, 0), InvalidArgument);
}

TEST_CASE("mesh samples retain the faces incident to sampled vertices") {
    TriMesh mesh = make_icosphere(1);
    SampleSet s = farthest_point_sample(mesh, 4, 0);
    auto incidence = mesh.vertex_face_incidence();
    std::vector<int> expected;
    for (int v : s.vertices)
        for (int f : incidence[static_cast<std::size_t>(v)]) expected.push_back(f);
    std::sort(expected.begin(), expected.end());
    expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
    CHECK(s.elements == expected);
}

TEST_CASE("graph samples retain edges touching sampled vertices") {
    WeightedGraph path = make_path_graph(10);
    SampleSet s = farthest_point_sample(path, 2, 0);  // vertices {0, 9}
    CHECK(s.elements == std::vector<int>{0, 8});      // first and last edge
}

TEST_CASE("grow_to_full_rank leaves an already-full-rank sample unchanged") {
    TriMesh mesh = make_icosphere(1);
    SpectralBasis basis = compute_basis(mesh, 6);
    MeshSamplerHolder holder(mesh, 0, OracleKind::fmm);
    holder.sampler().extend_to(20);
    std::vector<int> before = holder.sampler().vertices();
    SampleSet s = grow_to_full_rank(basis, mesh, holder.sampler());
    CHECK(s.vertices == before);
}

TEST_CASE("grow_to_full_rank reaches rank k-1 quickly on the path graph") {
    WeightedGraph path = make_path_graph(10);
    SpectralBasis basis = compute_basis(path, OperatorKind::unnormalized, 2);
    FarthestPointSampler fps = make_sampler(path, 0);
    SampleSet s = grow_to_full_rank(basis, path, fps);
    CHECK(s.vertices.size() <= 4);
    CHECK(detail::retained_condition(basis, s.elements) >= kRankThreshold);
}

TEST_CASE("deleting any row of a minimal retained set drops rank") {
    TriMesh mesh = make_icosphere(1);
    SpectralBasis basis = compute_basis(mesh, 5);
    MeshSamplerHolder holder(mesh, 0, OracleKind::fmm);
    SampleSet s = grow_to_full_rank(basis, mesh, holder.sampler());

    const int rpe = 3;
    const int k_nc = basis.num_nonconstant();
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(s.elements.size()) * rpe, k_nc);
    for (std::size_t i = 0; i < s.elements.size(); ++i)
        rows.middleRows(static_cast<Eigen::Index>(i) * rpe, rpe) =
            basis.grad_phis.block(3 * s.elements[i], basis.num_constant, rpe, k_nc);

    // greedily strip rows while full rank remains: a minimal row set
    auto rank_of = [&](const Eigen::MatrixXd& m) {
        if (m.rows() < m.cols()) return static_cast<Eigen::Index>(0);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        return static_cast<Eigen::Index>(sv[sv.size() - 1] >= kRankThreshold * sv[0] ? m.cols() : 0);
    };
    Eigen::MatrixXd minimal = rows;
    bool removed = true;
    while (removed) {
        removed = false;
        for (Eigen::Index r = 0; r < minimal.rows(); ++r) {
            Eigen::MatrixXd without(minimal.rows() - 1, minimal.cols());
            without.topRows(r) = minimal.topRows(r);
            without.bottomRows(minimal.rows() - 1 - r) = minimal.bottomRows(minimal.rows() - 1 - r);
            if (rank_of(without) == minimal.cols()) {
                minimal = without;
                removed = true;
                break;
            }
        }
    }
    REQUIRE(rank_of(minimal) == minimal.cols());
    for (Eigen::Index r = 0; r < minimal.rows(); ++r) {
        Eigen::MatrixXd without(minimal.rows() - 1, minimal.cols());
        without.topRows(r) = minimal.topRows(r);
        without.bottomRows(minimal.rows() - 1 - r) = minimal.bottomRows(minimal.rows() - 1 - r);
        CHECK(rank_of(without) < minimal.cols());
    }
}
