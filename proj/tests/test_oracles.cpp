#include <catch2/catch_amalgamated.hpp>

#include "specdist/oracles.hpp"
#include "specdist/shapes.hpp"

#include "test_support.hpp"

using namespace specdist;

TEST_CASE("dijkstra on weighted P3") {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 2.0}});
    DistanceMap d = dijkstra(g, SourceSet({0}));
    CHECK(d.values[0] == 0.0);
    CHECK(d.values[1] == 1.0);
    CHECK(d.values[2] == 3.0);
}

TEST_CASE("multi-source dijkstra takes the minimum") {
    WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 2.0}});
    DistanceMap d = dijkstra(g, SourceSet({0, 2}));
    CHECK(d.values[0] == 0.0);
    CHECK(d.values[1] == 1.0);
    CHECK(d.values[2] == 0.0);
}

TEST_CASE("unreachable vertices get infinity") {
    WeightedGraph g(4, {{0, 1, 1.0}});
    DistanceMap d = dijkstra(g, SourceSet({0}));
    CHECK(std::isinf(d.values[2]));
    CHECK(std::isinf(d.values[3]));
}

TEST_CASE("brute force handles the hand cases") {
    SECTION("triangle with a heavy direct edge prefers two hops") {
        WeightedGraph g(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 3.0}});
        CHECK(brute_force(g, 0).values[2] == 2.0);
    }
    SECTION("single edge") {
        WeightedGraph g(2, {{0, 1, 0.7}});
        CHECK(brute_force(g, 0).values[1] == 0.7);
    }
    SECTION("unit P4") {
        DistanceMap d = brute_force(make_path_graph(4), 0);
        for (int v = 0; v < 4; ++v) CHECK(d.values[v] == double(v));
    }
    SECTION("size cap") {
        CHECK_THROWS_AS(brute_force(make_path_graph(13), 0), InvalidArgument);
    }
}

TEST_CASE("dijkstra agrees exactly with brute force on random graphs") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int n = 4 + static_cast<int>(seed % 7);
        WeightedGraph g = make_random_connected_graph(n, n, seed + 100);
        const int src = static_cast<int>(seed) % n;
        DistanceMap fast = dijkstra(g, SourceSet({src}));
        DistanceMap slow = brute_force(g, src);
        for (int v = 0; v < n; ++v) CHECK(fast.values[v] == slow.values[v]);
    }
}

TEST_CASE("dijkstra distances satisfy the triangle inequality") {
    WeightedGraph g = make_random_connected_graph(25, 35, 13);
    std::vector<DistanceMap> maps;
    for (int v = 0; v < 25; ++v) maps.push_back(dijkstra(g, SourceSet({v})));
    Rng rng(19);
    for (int trial = 0; trial < 300; ++trial) {
        int a = rng.uniform_index(25), b = rng.uniform_index(25), c = rng.uniform_index(25);
        CHECK(maps[a].values[b] <= maps[a].values[c] + maps[c].values[b] + 1e-12);
    }
}

TEST_CASE("fast marching hits sources exactly and stays finite on connected meshes") {
    TriMesh mesh = make_icosphere(2);
    DistanceMap d = fast_marching(mesh, SourceSet({5}));
    CHECK(d.values[5] == 0.0);
    CHECK(d.values.maxCoeff() < kInfinity);
    CHECK(d.values.minCoeff() >= 0.0);
}

TEST_CASE("two zero-value sources update the opposite vertex to the triangle height") {
    // acute triangle: C = (0.4, 0.8); distance to the segment AB is the height 0.8
    TriMesh m;
    m.vertices.resize(3, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 0.4, 0.8, 0;
    m.faces.resize(1, 3);
    m.faces << 0, 1, 2;
    DistanceMap d = fast_marching(m, SourceSet({0, 1}));
    CHECK(d.values[2] == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("planar update matches a golden-section oracle") {
    // oracle: minimize (1-s) d_a + s d_b + |C - (A + s (B-A))| on [0,1]
    auto golden = [](const Eigen::Vector3d& A, const Eigen::Vector3d& B, const Eigen::Vector3d& C,
                     double da, double db) {
        auto f = [&](double s) { return (1 - s) * da + s * db + (C - A - s * (B - A)).norm(); };
        double lo = 0.0, hi = 1.0;
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            if (f(x1) < f(x2)) { hi = x2; x2 = x1; x1 = hi - phi * (hi - lo); }
            else { lo = x1; x1 = x2; x2 = lo + phi * (hi - lo); }
        }
        return std::min({f(0.0), f(1.0), f(0.5 * (lo + hi))});
    };
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Vector3d A(rng.uniform(-1, 1), rng.uniform(-1, 1), 0);
        Eigen::Vector3d B(rng.uniform(-1, 1), rng.uniform(-1, 1), 0);
        Eigen::Vector3d C(rng.uniform(-1, 1), rng.uniform(-1, 1), 0);
        if ((B - A).norm() < 0.2) continue;
        double da = rng.uniform(0, 1), db = rng.uniform(0, 1);
        double got = specdist::detail::triangle_update(A, B, C, da, db);
        double want = golden(A, B, C, da, db);
        CHECK(got == Catch::Approx(want).margin(1e-9));
    }
}

TEST_CASE("fast marching on a flat grid stays within 1% of Euclidean") {
    TriMesh grid = make_grid_mesh(48, 48);
    int obtuse = 0;
    DistanceMap d = fast_marching(grid, SourceSet({0}), &obtuse);
    const double diagonal = std::sqrt(2.0);
    double worst = 0.0;
    for (int v = 0; v < grid.num_vertices(); ++v) {
        double exact = grid.vertices.row(v).norm();
        worst = std::max(worst, std::abs(d.values[v] - exact));
    }
    CHECK(worst <= 0.01 * diagonal);
    CHECK(obtuse == 0);  // right triangles are never obtuse at the update vertex
}

TEST_CASE("fast marching never beats the edge-restricted geodesic") {
    TriMesh mesh = make_icosphere(2);
    WeightedGraph edges = mesh_to_graph(mesh);
    for (int src : {0, 17, 101}) {
        DistanceMap fmm = fast_marching(mesh, SourceSet({src}));
        DistanceMap dij = dijkstra(edges, SourceSet({src}));
        for (int v = 0; v < mesh.num_vertices(); ++v)
            CHECK(fmm.values[v] <= dij.values[v] + 1e-9);
    }
}

TEST_CASE("fast marching marks unreachable components infinite") {
    TriMesh m;
    m.vertices.resize(6, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 0, 6, 5, 0, 5, 6, 0;
    m.faces.resize(2, 3);
    m.faces << 0, 1, 2, 3, 4, 5;
    DistanceMap d = fast_marching(m, SourceSet({0}));
    CHECK(std::isinf(d.values[3]));
    CHECK(d.values[1] < kInfinity);
}

TEST_CASE("obtuse triangles are counted and use the one-point fallback") {
    // triangle obtuse at the updated vertex: both sources frozen, the apex
    // update must fall back to edge distances
    TriMesh m;
    m.vertices.resize(3, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 0.5, 0.05, 0;
    m.faces.resize(1, 3);
    m.faces << 0, 1, 2;
    int obtuse = 0;
    DistanceMap d = fast_marching(m, SourceSet({0, 1}), &obtuse);
    CHECK(obtuse > 0);
    const double edge = (m.vertices.row(2) - m.vertices.row(0)).norm();
    CHECK(d.values[2] == Catch::Approx(edge).margin(1e-12));
}
