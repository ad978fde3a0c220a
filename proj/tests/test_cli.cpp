#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specdist/basis.hpp"
#include "specdist/shapes.hpp"

#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace specdist;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SPECDIST_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    test_support::TempFile capture(".log");
    std::string cmd = cli_path() + " " + args + " > " + capture.path() + " 2>&1";
    int status = std::system(cmd.c_str());
    std::ifstream in(capture.path());
    std::string output((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, output};
}

struct TempDir {
    TempDir() {
        path = (fs::temp_directory_path() / ("specdist_cli_" + std::to_string(::getpid()))).string();
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (fs::path(path) / name).string(); }
    std::string path;
};

bool files_equal(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return !ca.empty() && ca == cb;
}

}  // namespace

TEST_CASE("cli: help and usage errors exit with code 2") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("nonsense-subcommand").exit_code == 2);
    CHECK(run("distance").exit_code == 2);  // missing required options
}

TEST_CASE("cli: precompute, distance, and sample round trip") {
    TempDir dir;
    const std::string mesh_path = dir.file("ico.off");
    write_off(make_icosphere(2), mesh_path);  // n = 162

    const std::string basis_path = dir.file("ico.basis");
    RunResult pre = run("precompute --input " + mesh_path + " --k 25 --out " + basis_path);
    INFO(pre.output);
    REQUIRE(pre.exit_code == 0);
    CHECK(pre.output.find("eigendecomposition") != std::string::npos);
    CHECK(pre.output.find("fps") != std::string::npos);
    CHECK(pre.output.find("factorization") != std::string::npos);
    CHECK(fs::exists(basis_path));
    CHECK(fs::exists(basis_path + ".json"));  // config sidecar

    SpectralBasis basis = load_basis(basis_path);
    CHECK(basis.k == 25);
    CHECK(basis.samples.has_value());

    SECTION("distance to all targets writes n rows") {
        const std::string csv_path = dir.file("d.csv");
        RunResult d = run("distance --basis " + basis_path + " --sources 0 --out " + csv_path +
                          " --timing");
        INFO(d.output);
        REQUIRE(d.exit_code == 0);
        CHECK(d.output.find("query excludes precompute") != std::string::npos);
        std::ifstream in(csv_path);
        int lines = 0;
        std::string line;
        bool has_config = false;
        while (std::getline(in, line)) {
            if (line.rfind("# config:", 0) == 0) has_config = true;
            ++lines;
        }
        CHECK(lines == 162 + 2);  // config comment + header + n rows
        CHECK(has_config);
    }

    SECTION("single sublinear target emits one value") {
        RunResult d = run("distance --basis " + basis_path + " --sources 0 --targets 100 --mode sublinear");
        INFO(d.output);
        REQUIRE(d.exit_code == 0);
        CHECK(d.output.find("vertex,distance") != std::string::npos);
        CHECK(d.output.find("100,") != std::string::npos);
    }

    SECTION("invalid source index exits with 2") {
        RunResult d = run("distance --basis " + basis_path + " --sources 4000");
        CHECK(d.exit_code == 2);
    }

    SECTION("precompute is deterministic per seed") {
        const std::string again = dir.file("ico2.basis");
        RunResult pre2 = run("precompute --input " + mesh_path + " --k 25 --out " + again);
        REQUIRE(pre2.exit_code == 0);
        CHECK(files_equal(basis_path, again));
    }

    SECTION("k >= n is rejected") {
        RunResult bad = run("precompute --input " + mesh_path + " --k 162 --out " + dir.file("x.basis"));
        CHECK(bad.exit_code == 2);
        CHECK(bad.output.find("k must be < n") != std::string::npos);
    }
}

TEST_CASE("cli: sample reproduces the hand-worked FPS sequence") {
    TempDir dir;
    const std::string graph_path = dir.file("path10.tsv");
    save_graph_edgelist(make_path_graph(10), graph_path);

    const std::string out = dir.file("samples.txt");
    RunResult r = run("sample --input " + graph_path + " --count 3 --seed-vertex 0 --out " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("cover radius") != std::string::npos);
    std::ifstream in(out);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "0\n9\n4\n");
    CHECK(fs::exists(out + ".json"));

    RunResult bad = run("sample --input " + graph_path + " --count 11 --out " + out);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli: sweep-time emits the grid csv and flags bad grids") {
    TempDir dir;
    const std::string mesh_path = dir.file("ico.off");
    write_off(make_icosphere(1), mesh_path);  // n = 42

    const std::string csv = dir.file("sweep.csv");
    RunResult r = run("sweep-time --input " + mesh_path + " --k 12 --m-grid 0.004,0.008,0.016 "
                      "--sources-count 2 --out " + csv);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("argmin m") != std::string::npos);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# config:", 0) == 0);
    std::getline(in, line);
    CHECK(line == "m,mean_l2,mean_relative");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);

    RunResult single = run("sweep-time --input " + mesh_path + " --k 12 --m-grid 8e-3:8e-3:1 "
                           "--sources-count 1 --out " + dir.file("one.csv"));
    CHECK(single.exit_code == 0);

    RunResult bad = run("sweep-time --input " + mesh_path + " --k 12 --m-grid 0.0,0.01 --out " +
                        dir.file("bad.csv"));
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli: benchmark produces the report, maps, and scaling csv") {
    TempDir dir;
    const std::string mesh_path = dir.file("ico.off");
    write_off(make_icosphere(2), mesh_path);

    RunResult r = run("benchmark --input " + mesh_path + " --k 20 --sources-count 3 "
                      "--repetitions 2 --out " + dir.path);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(dir.file("report.json")));
    CHECK(fs::exists(dir.file("scaling.csv")));
    CHECK(fs::exists(dir.file("ico_full_maps.csv")));
    CHECK(fs::exists(dir.file("ico_sublinear_maps.csv")));

    std::ifstream in(dir.file("report.json"));
    nlohmann::json report = nlohmann::json::parse(in);
    CHECK(report["config"]["seed"] == 0);
    CHECK(report["config"]["repetitions"] == 2);
    REQUIRE(report["rows"].size() == 3);  // oracle + full + sublinear
    bool saw_full = false;
    for (const auto& row : report["rows"]) {
        if (row["method"] == "full") {
            saw_full = true;
            CHECK(row["l2"].get<double>() < 25.0);
            CHECK(row.contains("query_ms_min"));
            CHECK(row.contains("query_ms_median"));
        }
    }
    CHECK(saw_full);

    SECTION("a second run reuses the stored basis") {
        RunResult again = run("benchmark --input " + mesh_path + " --k 20 --sources-count 3 --out " +
                              dir.path);
        REQUIRE(again.exit_code == 0);
        CHECK(again.output.find("loaded basis") != std::string::npos);
    }
}

TEST_CASE("cli: benchmark over a mesh family emits one row set per size") {
    TempDir dir;
    const std::string small = dir.file("s1.off");
    const std::string large = dir.file("s2.off");
    write_off(make_icosphere(1), small);  // 42
    write_off(make_icosphere(2), large);  // 162

    RunResult r = run("benchmark --input " + small + " --input " + large +
                      " --k 12 --sources-count 2 --out " + dir.path);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(dir.file("report.json"));
    nlohmann::json report = nlohmann::json::parse(in);
    REQUIRE(report["rows"].size() == 6);  // (oracle, full, sublinear) x 2 inputs
    std::vector<int> full_ns;
    for (const auto& row : report["rows"])
        if (row["method"] == "full") full_ns.push_back(row["n"].get<int>());
    CHECK(full_ns == std::vector<int>{42, 162});

    // the scaling csv carries one line per (n, method)
    std::ifstream scaling(dir.file("scaling.csv"));
    int data_lines = 0;
    std::string line;
    while (std::getline(scaling, line))
        if (!line.empty() && line[0] != '#' && line.rfind("n,", 0) != 0) ++data_lines;
    CHECK(data_lines == 6);
}

TEST_CASE("cli: mesh sampling defaults to the fast-marching oracle") {
    TempDir dir;
    const std::string mesh_path = dir.file("ico.off");
    write_off(make_icosphere(1), mesh_path);
    const std::string out = dir.file("mesh_samples.txt");
    RunResult r = run("sample --input " + mesh_path + " --count 5 --out " + out);
    REQUIRE(r.exit_code == 0);
    std::ifstream side(out + ".json");
    nlohmann::json config = nlohmann::json::parse(side);
    CHECK(config["oracle"] == "fmm");
}

TEST_CASE("cli: graph inputs run the random-walk pipeline end to end") {
    TempDir dir;
    const std::string graph_path = dir.file("path.tsv");
    save_graph_edgelist(make_path_graph(200), graph_path);

    RunResult r = run("benchmark --input " + graph_path + " --k 12 --sources-count 2 --out " +
                      dir.path);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(dir.file("report.json"));
    nlohmann::json report = nlohmann::json::parse(in);
    bool saw_dijkstra = false, saw_full = false;
    for (const auto& row : report["rows"]) {
        if (row["method"] == "dijkstra") saw_dijkstra = true;
        if (row["method"] == "full") {
            saw_full = true;
            CHECK(row["tau"].get<double>() < 0.10);  // orderings nearly exact on a path
        }
    }
    CHECK(saw_dijkstra);
    CHECK(saw_full);

    SECTION("a mesh input with a graph operator uses its edge graph") {
        const std::string mesh_path = dir.file("ico.off");
        write_off(make_icosphere(1), mesh_path);
        const std::string basis_path = dir.file("rw.basis");
        RunResult pre = run("precompute --input " + mesh_path + " --operator rw --k 10 --out " +
                            basis_path);
        INFO(pre.output);
        REQUIRE(pre.exit_code == 0);
        SpectralBasis basis = load_basis(basis_path);
        CHECK(basis.domain == DomainKind::graph);
        CHECK(basis.op == OperatorKind::random_walk);
        CHECK(basis.grad_phis.rows() == 120);  // icosphere(1) edge count
    }
}

TEST_CASE("cli: generator writes loadable shapes") {
    const char* gen = std::getenv("SPECDIST_GEN");
    REQUIRE(gen != nullptr);
    TempDir dir;
    std::string cmd = std::string(gen) + " --shape torus --major 8 --minor 6 --out " +
                      dir.file("t.off") + " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(load_mesh(dir.file("t.off")).num_vertices() == 48);

    cmd = std::string(gen) + " --shape knn --n 50 --dim 3 --knn 4 --out " + dir.file("g.tsv") +
          " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(load_graph_edgelist(dir.file("g.tsv")).num_vertices() == 50);
}
