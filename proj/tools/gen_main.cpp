// specdist-gen: emit the built-in test shapes as OFF meshes or edge lists,
// for feeding the main CLI.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specdist/specdist.hpp"

using namespace specdist;

int main(int argc, char** argv) {
    CLI::App app{"generate meshes and graphs for the spectral distance toolkit"};
    std::string shape = "icosphere";
    std::string out;
    int subdivisions = 3;
    int rings = 40, segments = 60;
    int major = 48, minor = 32;
    int nx = 32, ny = 32;
    int n = 1000, dim = 5, knn = 7;
    double radius = 1.0;
    std::uint64_t seed = 0;

    app.add_option("--shape", shape, "icosphere|uvsphere|torus|grid|path|knn")->required();
    app.add_option("--out", out, "output file (.off for meshes, .tsv for graphs)")->required();
    app.add_option("--subdiv", subdivisions, "icosphere subdivisions");
    app.add_option("--rings", rings, "uvsphere rings");
    app.add_option("--segments", segments, "uvsphere segments");
    app.add_option("--major", major, "torus major segments");
    app.add_option("--minor", minor, "torus minor segments");
    app.add_option("--nx", nx, "grid columns");
    app.add_option("--ny", ny, "grid rows");
    app.add_option("--n", n, "path/knn vertex count");
    app.add_option("--dim", dim, "knn point dimension");
    app.add_option("--knn", knn, "knn neighbor count");
    app.add_option("--radius", radius, "sphere radius");
    app.add_option("--seed", seed, "knn point seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (shape == "icosphere") {
            write_off(make_icosphere(subdivisions, radius), out);
        } else if (shape == "uvsphere") {
            write_off(make_uv_sphere(rings, segments, radius), out);
        } else if (shape == "torus") {
            write_off(make_torus(major, minor), out);
        } else if (shape == "grid") {
            write_off(make_grid_mesh(nx, ny), out);
        } else if (shape == "path") {
            save_graph_edgelist(make_path_graph(n), out);
        } else if (shape == "knn") {
            save_graph_edgelist(make_knn_graph(random_points_uniform(n, dim, seed), knn), out);
        } else {
            std::cerr << "error: unknown shape '" << shape << "'\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}
