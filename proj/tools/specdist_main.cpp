// specdist: precompute spectral bases and answer amortized distance queries
// on meshes and weighted graphs, with a benchmark harness around the exact
// oracles.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specdist/specdist.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specdist;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_mesh_path(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == "off" || ext == "obj";
}

struct Domain {
    std::optional<TriMesh> mesh;
    std::optional<WeightedGraph> graph;

    bool is_mesh() const { return mesh.has_value(); }
    int num_vertices() const { return is_mesh() ? mesh->num_vertices() : graph->num_vertices(); }
};

Domain load_domain(const std::string& path) {
    Domain d;
    if (is_mesh_path(path)) {
        std::vector<std::string> warnings;
        MeshLoadOptions opts;
        opts.warnings = &warnings;
        d.mesh = load_mesh(path, opts);
        for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << "\n";
    } else {
        d.graph = load_graph_edgelist(path);
    }
    return d;
}

OperatorKind parse_operator(const std::string& name) {
    if (name == "mesh") return OperatorKind::mesh;
    if (name == "unnorm") return OperatorKind::unnormalized;
    if (name == "rw") return OperatorKind::random_walk;
    throw InvalidArgument("unknown operator '" + name + "' (expected mesh|unnorm|rw)");
}

std::vector<int> parse_index_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw InvalidArgument("bad index '" + tok + "' in list");
        }
    }
    if (out.empty()) throw InvalidArgument("empty index list");
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_sidecar(const std::string& artifact_path, const json& config) {
    write_text(artifact_path + ".json", config.dump(2) + "\n");
}

// Shared option state; flags are registered globally and on subcommands.
struct Options {
    std::vector<std::string> inputs;
    std::string operator_name;  // empty = derive from input kind
    int k = 250;
    double m = 8e-3;
    std::string mode = "full";
    std::uint64_t seed = 0;
    std::string out;

    std::string basis_path;
    std::string sources_text;
    std::string targets_text = "all";
    std::optional<double> t_override;
    std::optional<int> steps_override;
    std::string offset_mode = "nonneg";
    bool timing = false;
    bool unweighted = false;
    double sample_factor = kDefaultSampleFactor;
    bool no_samples = false;
    int seed_vertex = 0;
    double source_frac = 0.05;
    int sources_count = 0;  // 0 = use source_frac
    int repetitions = 1;
    std::string oracle_name = "auto";
    std::string m_grid = "1e-3:1e-1:13";
    int count = 0;
};

/** Resolve the operator and reshape the domain to fit: graph operators on a
 *  mesh input run on its Euclidean edge graph. */
OperatorKind resolve_operator(const Options& opt, Domain& domain) {
    OperatorKind kind = opt.operator_name.empty()
                            ? (domain.is_mesh() ? OperatorKind::mesh : OperatorKind::random_walk)
                            : parse_operator(opt.operator_name);
    if (kind == OperatorKind::mesh && !domain.is_mesh())
        throw InvalidArgument("operator 'mesh' needs a mesh input");
    if (kind != OperatorKind::mesh && domain.is_mesh()) {
        domain.graph = mesh_to_graph(*domain.mesh);
        domain.mesh.reset();
    }
    return kind;
}

OracleKind resolve_oracle(const Options& opt, const Domain& domain) {
    if (opt.oracle_name == "auto") return domain.is_mesh() ? OracleKind::fmm : OracleKind::dijkstra;
    if (opt.oracle_name == "fmm") return OracleKind::fmm;
    if (opt.oracle_name == "dijkstra") return OracleKind::dijkstra;
    if (opt.oracle_name == "brute_force") return OracleKind::brute_force;
    throw InvalidArgument("unknown oracle '" + opt.oracle_name + "'");
}

json base_config(const char* command, const Options& opt) {
    json j;
    j["command"] = command;
    j["k"] = opt.k;
    j["m"] = opt.m;
    j["mode"] = opt.mode;
    j["seed"] = opt.seed;
    j["area_weighted"] = !opt.unweighted;
    return j;
}

DistanceParams params_from(const Options& opt) {
    DistanceParams p;
    p.m = opt.m;
    p.t = opt.t_override;
    p.walk_steps = opt.steps_override;
    p.area_weighted = !opt.unweighted;
    if (opt.offset_mode == "nonneg") p.offset = OffsetMode::nonnegative;
    else if (opt.offset_mode == "zero") p.offset = OffsetMode::zero_at_source;
    else throw InvalidArgument("unknown offset mode '" + opt.offset_mode + "' (expected nonneg|zero)");
    return p;
}

struct PrecomputeResult {
    SpectralBasis basis;
    double eigen_ms = 0.0;
    double gradient_ms = 0.0;
    double fps_ms = 0.0;
    double factorization_ms = 0.0;
};

PrecomputeResult run_precompute(const Domain& domain, OperatorKind op, const Options& opt) {
    PrecomputeResult out;
    const int n = domain.num_vertices();
    if (opt.k >= n) throw InvalidArgument("k must be < n (k=" + std::to_string(opt.k) +
                                          ", n=" + std::to_string(n) + ")");
    BasisOptions bopts;
    bopts.eigen.seed = opt.seed ^ 0x5d15ull;

    // the timing split reports eigendecomposition and gradient assembly apart
    auto t0 = Clock::now();
    if (domain.is_mesh()) {
        CotangentOperators cot = cotangent_laplacian(*domain.mesh);
        EigenResult eig = smallest_eigenpairs(cot.stiffness, cot.mass, opt.k, bopts.eigen);
        out.eigen_ms = ms_since(t0);
        t0 = Clock::now();
        GradientOperator grad = build_gradient(*domain.mesh);
        out.basis.domain = DomainKind::mesh;
        out.basis.op = OperatorKind::mesh;
        out.basis.n = n;
        out.basis.k = opt.k;
        out.basis.lambdas = std::move(eig.lambdas);
        out.basis.phis = std::move(eig.vectors);
        out.basis.grad_phis = grad.op * out.basis.phis;
        out.basis.face_areas = grad.face_areas;
        out.basis.mass_trace = cot.mass.sum();
        out.basis.num_constant =
            specdist::detail::count_constant_modes(out.basis.lambdas, bopts.zero_eigenvalue_factor);
        specdist::detail::zero_constant_gradient_columns(out.basis);
        out.gradient_ms = ms_since(t0);
    } else {
        out.basis = compute_basis(*domain.graph, op, opt.k, bopts);
        out.eigen_ms = ms_since(t0);
    }

    if (!opt.no_samples) {
        t0 = Clock::now();
        const int budget = std::min(n, static_cast<int>(std::ceil(opt.sample_factor * opt.k)));
        if (domain.is_mesh()) {
            MeshSamplerHolder holder(*domain.mesh, opt.seed_vertex, OracleKind::fmm);
            holder.sampler().extend_to(budget);
            out.basis.samples = grow_to_full_rank(out.basis, *domain.mesh, holder.sampler());
        } else {
            FarthestPointSampler fps = make_sampler(*domain.graph, opt.seed_vertex);
            fps.extend_to(budget);
            out.basis.samples = grow_to_full_rank(out.basis, *domain.graph, fps);
        }
        out.fps_ms = ms_since(t0);

        if (out.basis.op != OperatorKind::unnormalized) {
            t0 = Clock::now();
            QueryEngine warm(out.basis, QueryMode::sublinear, params_from(opt));
            (void)warm;
            out.factorization_ms = ms_since(t0);
        }
    }
    return out;
}

int cmd_precompute(const Options& opt) {
    if (opt.inputs.empty()) throw InvalidArgument("--input is required");
    const std::string input = opt.inputs.front();
    Domain domain = load_domain(input);
    OperatorKind op = resolve_operator(opt, domain);
    PrecomputeResult pre = run_precompute(domain, op, opt);

    std::string out_path = opt.out.empty() ? input + ".basis" : opt.out;
    save_basis(pre.basis, out_path);

    json config = base_config("precompute", opt);
    config["input"] = input;
    config["operator"] = to_string(op);
    config["n"] = domain.num_vertices();
    config["sample_factor"] = opt.sample_factor;
    config["seed_vertex"] = opt.seed_vertex;
    config["samples"] = pre.basis.samples ? pre.basis.samples->vertices.size() : 0;
    config["out"] = out_path;
    write_sidecar(out_path, config);

    std::cout << "precompute " << input << " (n=" << domain.num_vertices() << ", k=" << opt.k
              << ", operator=" << to_string(op) << ", seed=" << opt.seed << ")\n";
    std::cout << "  eigendecomposition: " << pre.eigen_ms << " ms\n";
    std::cout << "  gradients:          " << pre.gradient_ms << " ms\n";
    std::cout << "  fps:                " << pre.fps_ms << " ms\n";
    std::cout << "  factorization:      " << pre.factorization_ms << " ms\n";
    std::cout << "  basis: " << out_path << " ("
              << (pre.basis.samples ? pre.basis.samples->vertices.size() : 0) << " samples)\n";
    return 0;
}

int cmd_distance(const Options& opt) {
    if (opt.basis_path.empty()) throw InvalidArgument("--basis is required");
    if (opt.sources_text.empty()) throw InvalidArgument("--sources is required");
    auto t_load = Clock::now();
    SpectralBasis basis = load_basis(opt.basis_path);
    const double load_ms = ms_since(t_load);

    SourceSet sources(parse_index_list(opt.sources_text));
    sources.validate(basis.n);
    if (opt.mode != "full" && opt.mode != "sublinear")
        throw InvalidArgument("unknown mode '" + opt.mode + "' (expected full|sublinear)");
    QueryMode mode = opt.mode == "sublinear" ? QueryMode::sublinear : QueryMode::full;

    auto t_build = Clock::now();
    QueryEngine engine(basis, mode, params_from(opt));
    const double build_ms = ms_since(t_build);

    std::vector<int> targets;
    if (opt.targets_text != "all") targets = parse_index_list(opt.targets_text);

    auto t_query = Clock::now();
    DistanceMap map = targets.empty() ? engine.map(sources) : engine.values_at(sources, targets);
    const double query_ms = ms_since(t_query);

    json config = base_config("distance", opt);
    config["basis"] = opt.basis_path;
    config["sources"] = sources.indices;
    config["targets"] = opt.targets_text;
    config["t"] = engine.time_parameter();
    config["n"] = basis.n;

    std::ostringstream body;
    body << "# config: " << config.dump() << "\n";
    body << "vertex,distance\n";
    if (targets.empty()) {
        for (int v = 0; v < basis.n; ++v) body << v << "," << map.values[v] << "\n";
    } else {
        for (std::size_t i = 0; i < targets.size(); ++i)
            body << targets[i] << "," << map.values[static_cast<Eigen::Index>(i)] << "\n";
    }
    if (opt.out.empty()) {
        std::cout << body.str();
    } else {
        write_text(opt.out, body.str());
        std::cout << "wrote " << (targets.empty() ? basis.n : static_cast<int>(targets.size()))
                  << " distances to " << opt.out << "\n";
    }
    if (opt.timing) {
        std::cout << "timing: load " << load_ms << " ms, engine " << build_ms << " ms, query "
                  << query_ms << " ms (query excludes precompute)\n";
    }
    return 0;
}

struct BenchRow {
    std::string method;
    ErrorReport err;
    double precompute_ms = 0.0;
    std::vector<double> query_ms;  // one per repetition
};

int cmd_benchmark(const Options& opt) {
    if (opt.inputs.empty()) throw InvalidArgument("--input is required");
    if (opt.k < 2) throw InvalidArgument("benchmark needs k >= 2");
    if (opt.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    const std::string out_dir = opt.out.empty() ? "bench_out" : opt.out;
    fs::create_directories(out_dir);

    json report;
    report["config"] = base_config("benchmark", opt);
    report["config"]["inputs"] = opt.inputs;
    report["config"]["source_frac"] = opt.source_frac;
    report["config"]["sources_count"] = opt.sources_count;
    report["config"]["repetitions"] = opt.repetitions;
    report["rows"] = json::array();

    std::ostringstream scaling_csv;
    scaling_csv << "# config: " << report["config"].dump() << "\n";
    scaling_csv << "n,method,precompute_ms,query_ms_min,query_ms_median\n";

    for (const std::string& input : opt.inputs) {
        Domain domain = load_domain(input);
        OperatorKind op = resolve_operator(opt, domain);
        OracleKind oracle = resolve_oracle(opt, domain);
        const int n = domain.num_vertices();
        const std::string stem = fs::path(input).stem().string();

        // reuse a stored basis when present, otherwise precompute and persist
        const std::string basis_path =
            (fs::path(out_dir) / (stem + "_k" + std::to_string(opt.k) + ".basis")).string();
        SpectralBasis basis;
        double precompute_ms = 0.0;
        if (fs::exists(basis_path)) {
            basis = load_basis(basis_path);
            std::cout << "loaded basis " << basis_path << "\n";
        } else {
            auto t0 = Clock::now();
            PrecomputeResult pre = run_precompute(domain, op, opt);
            precompute_ms = ms_since(t0);
            basis = std::move(pre.basis);
            save_basis(basis, basis_path);
            json cfg = base_config("precompute", opt);
            cfg["input"] = input;
            write_sidecar(basis_path, cfg);
            std::cout << "auto-precomputed basis " << basis_path << " (" << precompute_ms
                      << " ms)\n";
        }

        // seeded source selection
        const int want = opt.sources_count > 0
                             ? opt.sources_count
                             : std::max(1, static_cast<int>(std::lround(opt.source_frac * n)));
        Rng rng(opt.seed);
        std::vector<int> source_ids = rng.sample_without_replacement(n, want);

        // oracle maps fix the diameter
        WeightedGraph edge_graph = domain.is_mesh() ? mesh_to_graph(*domain.mesh) : *domain.graph;
        std::vector<DistanceMap> oracle_maps;
        double oracle_total_ms = 0.0;
        for (int s : source_ids) {
            auto t0 = Clock::now();
            DistanceMap m = (oracle == OracleKind::fmm && domain.is_mesh())
                                ? fast_marching(*domain.mesh, SourceSet({s}))
                                : dijkstra(edge_graph, SourceSet({s}));
            oracle_total_ms += ms_since(t0);
            oracle_maps.push_back(std::move(m));
        }
        double diameter = 0.0;
        for (const auto& m : oracle_maps)
            for (Eigen::Index i = 0; i < m.values.size(); ++i)
                if (std::isfinite(m.values[i])) diameter = std::max(diameter, m.values[i]);
        if (diameter <= 0.0) throw NumericalError("degenerate benchmark: zero diameter");

        auto run_mode = [&](QueryMode mode, const std::string& method) {
            BenchRow row;
            row.method = method;
            auto t_build = Clock::now();
            QueryEngine engine(basis, mode, params_from(opt));
            row.precompute_ms = precompute_ms + ms_since(t_build);
            Eigen::MatrixXd maps(n, static_cast<Eigen::Index>(source_ids.size()));
            for (int rep = 0; rep < std::max(1, opt.repetitions); ++rep) {
                auto t0 = Clock::now();
                for (std::size_t i = 0; i < source_ids.size(); ++i) {
                    DistanceMap m = engine.map(SourceSet({source_ids[i]}));
                    if (rep == 0) maps.col(static_cast<Eigen::Index>(i)) = m.values;
                }
                row.query_ms.push_back(ms_since(t0) / static_cast<double>(source_ids.size()));
            }
            // mean error over sources
            ErrorReport mean;
            double tau_sum = 0.0;
            for (std::size_t i = 0; i < source_ids.size(); ++i) {
                DistanceMap m;
                m.values = maps.col(static_cast<Eigen::Index>(i));
                ErrorReport e = compare(m, oracle_maps[i], diameter);
                mean.relative_mean += e.relative_mean;
                mean.l2 += e.l2;
                mean.linf += e.linf;
                mean.n_compared += e.n_compared;
                mean.excluded += e.excluded;
                tau_sum += kendall_tau(m, oracle_maps[i]);
            }
            const double cnt = static_cast<double>(source_ids.size());
            mean.relative_mean /= cnt;
            mean.l2 /= cnt;
            mean.linf /= cnt;
            mean.kendall_tau = tau_sum / cnt;
            row.err = mean;

            // per-map CSV (first repetition)
            std::ostringstream csv;
            json cfg = report["config"];
            cfg["input"] = input;
            cfg["method"] = method;
            cfg["sources"] = source_ids;
            csv << "# config: " << cfg.dump() << "\n";
            csv << "vertex";
            for (int s : source_ids) csv << ",src" << s;
            csv << "\n";
            for (int v = 0; v < n; ++v) {
                csv << v;
                for (Eigen::Index c = 0; c < maps.cols(); ++c) csv << "," << maps(v, c);
                csv << "\n";
            }
            write_text((fs::path(out_dir) / (stem + "_" + method + "_maps.csv")).string(), csv.str());
            return row;
        };

        std::vector<BenchRow> rows;
        rows.push_back(run_mode(QueryMode::full, "full"));
        if (basis.samples) rows.push_back(run_mode(QueryMode::sublinear, "sublinear"));

        BenchRow oracle_row;
        oracle_row.method = to_string(oracle);
        oracle_row.query_ms.push_back(oracle_total_ms / static_cast<double>(source_ids.size()));

        auto emit = [&](const BenchRow& row, bool has_err) {
            std::vector<double> sorted = row.query_ms;
            std::sort(sorted.begin(), sorted.end());
            const double q_min = sorted.front();
            const double q_median = sorted[sorted.size() / 2];
            json r = has_err ? report_json(row.err, row.method, opt.k,
                                           0.0, n, q_median)
                             : json{{"method", row.method}, {"n", n}, {"runtime_ms", q_median}};
            r["query_ms_min"] = q_min;
            r["query_ms_median"] = q_median;
            r["precompute_ms"] = row.precompute_ms;
            r["input"] = input;
            report["rows"].push_back(r);
            scaling_csv << n << "," << row.method << "," << row.precompute_ms << "," << q_min << ","
                        << q_median << "\n";
            std::cout << "  " << input << " " << row.method;
            if (has_err)
                std::cout << ": relative " << row.err.relative_mean << "%, l2 " << row.err.l2
                          << "%, linf " << row.err.linf << "%";
            std::cout << ", query " << q_median << " ms\n";
        };
        emit(oracle_row, false);
        for (const auto& r : rows) emit(r, true);
    }

    write_text((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
    write_text((fs::path(out_dir) / "scaling.csv").string(), scaling_csv.str());
    std::cout << "report: " << (fs::path(out_dir) / "report.json").string() << "\n";
    return 0;
}

int cmd_sweep_time(const Options& opt) {
    if (opt.inputs.empty()) throw InvalidArgument("--input is required");
    const std::string input = opt.inputs.front();
    Domain domain = load_domain(input);
    if (!domain.is_mesh()) throw InvalidArgument("sweep-time needs a mesh input");

    // grid: "lo:hi:count" (log-spaced) or comma-separated values
    std::vector<double> grid;
    if (opt.m_grid.find(':') != std::string::npos) {
        double lo, hi;
        int count;
        char c1, c2;
        std::istringstream gs(opt.m_grid);
        if (!(gs >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
            throw InvalidArgument("bad --m-grid '" + opt.m_grid + "' (expected lo:hi:count)");
        if (count == 1) {
            grid.push_back(lo);
        } else {
            for (int i = 0; i < count; ++i)
                grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
        }
    } else {
        std::stringstream ss(opt.m_grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) if (!tok.empty()) grid.push_back(std::stod(tok));
    }
    if (grid.empty()) throw InvalidArgument("empty m grid");
    for (double m : grid)
        if (!(m > 0.0)) throw InvalidArgument("t must be positive (m=" + std::to_string(m) + ")");

    Options popt = opt;
    PrecomputeResult pre = run_precompute(domain, OperatorKind::mesh, popt);
    const SpectralBasis& basis = pre.basis;

    const int want = opt.sources_count > 0 ? opt.sources_count : 5;
    Rng rng(opt.seed);
    std::vector<int> source_ids = rng.sample_without_replacement(basis.n, want);
    std::vector<DistanceMap> refs;
    double diameter = 0.0;
    for (int s : source_ids) {
        refs.push_back(fast_marching(*domain.mesh, SourceSet({s})));
        diameter = std::max(diameter, refs.back().values.maxCoeff());
    }

    json config = base_config("sweep-time", opt);
    config["input"] = input;
    config["m_grid"] = grid;
    config["sources"] = source_ids;

    std::ostringstream csv;
    csv << "# config: " << config.dump() << "\n";
    csv << "m,mean_l2,mean_relative\n";
    double best_m = grid.front(), best_l2 = kInfinity;
    for (double m : grid) {
        DistanceParams params = params_from(opt);
        params.m = m;
        params.t.reset();
        QueryEngine engine(basis, QueryMode::full, params);
        double l2 = 0.0, rel = 0.0;
        for (std::size_t i = 0; i < source_ids.size(); ++i) {
            ErrorReport e = compare(engine.map(SourceSet({source_ids[i]})), refs[i], diameter);
            l2 += e.l2;
            rel += e.relative_mean;
        }
        l2 /= static_cast<double>(source_ids.size());
        rel /= static_cast<double>(source_ids.size());
        csv << m << "," << l2 << "," << rel << "\n";
        if (l2 < best_l2) {
            best_l2 = l2;
            best_m = m;
        }
        std::cout << "  m=" << m << ": mean l2 " << l2 << "%, mean relative " << rel << "%\n";
    }
    std::cout << "argmin m = " << best_m << " (mean l2 " << best_l2 << "%)\n";
    if (!opt.out.empty()) {
        write_text(opt.out, csv.str());
        std::cout << "wrote " << opt.out << "\n";
    } else {
        std::cout << csv.str();
    }
    return 0;
}

int cmd_sample(const Options& opt) {
    if (opt.inputs.empty()) throw InvalidArgument("--input is required");
    const std::string input = opt.inputs.front();
    Domain domain = load_domain(input);
    if (opt.count < 1) throw InvalidArgument("--count must be positive");
    if (opt.count > domain.num_vertices())
        throw InvalidArgument("--count exceeds the vertex count");
    OracleKind oracle = resolve_oracle(opt, domain);

    SampleSet samples = domain.is_mesh()
                            ? farthest_point_sample(*domain.mesh, opt.count, opt.seed_vertex, oracle)
                            : farthest_point_sample(*domain.graph, opt.count, opt.seed_vertex, oracle);

    for (std::size_t i = 0; i < samples.vertices.size(); ++i)
        std::cout << "sample " << samples.vertices[i] << " cover radius " << samples.cover_radii[i]
                  << "\n";

    std::ostringstream body;
    for (int v : samples.vertices) body << v << "\n";
    const std::string out_path = opt.out.empty() ? input + ".samples" : opt.out;
    write_text(out_path, body.str());
    json config = base_config("sample", opt);
    config["input"] = input;
    config["count"] = opt.count;
    config["seed_vertex"] = opt.seed_vertex;
    config["oracle"] = to_string(oracle);
    write_sidecar(out_path, config);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral distance toolkit: amortized geodesic/graph distance from a truncated "
                 "Laplacian eigenbasis"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", opt.inputs, "input mesh (.off/.obj) or edge list");
        cmd->add_option("--operator", opt.operator_name, "operator: mesh|unnorm|rw");
        cmd->add_option("--k", opt.k, "basis size");
        cmd->add_option("--m", opt.m, "heat time multiplier");
        cmd->add_option("--mode", opt.mode, "query mode: full|sublinear");
        cmd->add_option("--seed", opt.seed, "RNG seed (recorded in outputs)");
        cmd->add_option("--out", opt.out, "output path / directory");
        cmd->add_flag("--unweighted", opt.unweighted, "disable the area weighting of the fit");
    };

    CLI::App* pre = app.add_subcommand("precompute", "compute and store a spectral basis");
    add_common(pre);
    pre->add_option("--sample-factor", opt.sample_factor, "FPS budget as a multiple of k");
    pre->add_flag("--no-samples", opt.no_samples, "skip farthest point sampling");
    pre->add_option("--seed-vertex", opt.seed_vertex, "FPS seed vertex");

    CLI::App* dist = app.add_subcommand("distance", "query distances from a stored basis");
    add_common(dist);
    dist->add_option("--basis", opt.basis_path, "basis file from precompute")->required();
    dist->add_option("--sources", opt.sources_text, "comma-separated source vertices")->required();
    dist->add_option("--targets", opt.targets_text, "'all' or comma-separated targets");
    dist->add_option("--t", opt.t_override, "explicit diffusion time");
    dist->add_option("--steps", opt.steps_override, "explicit random-walk steps");
    dist->add_option("--offset", opt.offset_mode, "offset mode: nonneg|zero");
    dist->add_flag("--timing", opt.timing, "print per-stage wall clock");

    CLI::App* bench = app.add_subcommand("benchmark", "oracle vs full vs sublinear error tables");
    add_common(bench);
    bench->add_option("--source-frac", opt.source_frac, "fraction of vertices used as sources");
    bench->add_option("--sources-count", opt.sources_count, "absolute source count (overrides frac)");
    bench->add_option("--repetitions", opt.repetitions, "timing repetitions");
    bench->add_option("--oracle", opt.oracle_name, "reference oracle: auto|fmm|dijkstra");
    bench->add_option("--sample-factor", opt.sample_factor, "FPS budget as a multiple of k");
    bench->add_option("--seed-vertex", opt.seed_vertex, "FPS seed vertex");

    CLI::App* sweep = app.add_subcommand("sweep-time", "mean error as a function of the multiplier m");
    add_common(sweep);
    sweep->add_option("--m-grid", opt.m_grid, "lo:hi:count (log-spaced) or comma list");
    sweep->add_option("--sources-count", opt.sources_count, "number of random sources");
    sweep->add_flag("--no-samples", opt.no_samples, "skip farthest point sampling");
    sweep->add_option("--seed-vertex", opt.seed_vertex, "FPS seed vertex");

    CLI::App* sample = app.add_subcommand("sample", "farthest point sampling to a text file");
    add_common(sample);
    sample->add_option("--count", opt.count, "number of samples")->required();
    sample->add_option("--seed-vertex", opt.seed_vertex, "FPS seed vertex");
    sample->add_option("--oracle", opt.oracle_name, "distance oracle: auto|fmm|dijkstra");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (pre->parsed()) return cmd_precompute(opt);
        if (dist->parsed()) return cmd_distance(opt);
        if (bench->parsed()) return cmd_benchmark(opt);
        if (sweep->parsed()) return cmd_sweep_time(opt);
        if (sample->parsed()) return cmd_sample(opt);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
