#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specdist {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class DomainKind : std::uint32_t { mesh = 0, graph = 1 };
enum class OperatorKind : std::uint32_t { mesh = 0, unnormalized = 1, random_walk = 2 };
enum class OracleKind : std::uint32_t { dijkstra = 0, fmm = 1, brute_force = 2 };
enum class QueryMode { full, sublinear };
enum class OffsetMode { zero_at_source, nonnegative };

/** Malformed input files, unknown formats, broken containers. */
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Caller-side contract violations (bad indices, bad parameters). */
class InvalidArgument : public std::runtime_error {
public:
    explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

/** Numerical failures: non-convergence, rank deficiency. */
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), residual_achieved(residual) {}
    double residual_achieved;
};

inline const char* to_string(OperatorKind op) {
    switch (op) {
        case OperatorKind::mesh: return "mesh";
        case OperatorKind::unnormalized: return "unnorm";
        case OperatorKind::random_walk: return "rw";
    }
    return "?";
}

inline const char* to_string(OracleKind o) {
    switch (o) {
        case OracleKind::dijkstra: return "dijkstra";
        case OracleKind::fmm: return "fmm";
        case OracleKind::brute_force: return "brute_force";
    }
    return "?";
}

/** Nonempty, duplicate-free set of source vertex indices. */
struct SourceSet {
    std::vector<int> indices;

    SourceSet() = default;
    SourceSet(std::initializer_list<int> list) : indices(list) {}
    explicit SourceSet(std::vector<int> idx) : indices(std::move(idx)) {}

    void validate(int n) const {
        if (indices.empty()) throw InvalidArgument("source set is empty");
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (int v : indices) {
            if (v < 0 || v >= n)
                throw InvalidArgument("source index " + std::to_string(v) + " out of range [0," +
                                      std::to_string(n) + ")");
            if (seen[static_cast<std::size_t>(v)])
                throw InvalidArgument("duplicate source index " + std::to_string(v));
            seen[static_cast<std::size_t>(v)] = true;
        }
    }

    std::size_t size() const { return indices.size(); }
};

/** Vertex subset selected by farthest point sampling, plus the gradient
 *  rows it retains (face ids on meshes, edge ids on graphs). */
struct SampleSet {
    std::vector<int> vertices;       // in selection order
    std::vector<int> elements;       // retained faces / edges, ascending
    std::vector<double> cover_radii; // max-min distance after each selection
    int seed_vertex = 0;
    OracleKind oracle = OracleKind::dijkstra;

    std::size_t size() const { return vertices.size(); }
};

/** Per-vertex distances from a source set, tagged with provenance. */
struct DistanceMap {
    Eigen::VectorXd values;    // aligned with `targets`, or with 0..n-1 when targets is empty
    std::vector<int> targets;  // empty means "all vertices"
    std::vector<int> sources;
    std::string method;        // "dijkstra" | "fmm" | "brute_force" | "spectral_full" | ...
    double t = 0.0;            // diffusion time / walk steps, when applicable
    int k = 0;                 // basis size, when applicable
    int sample_count = 0;      // sublinear sample count, when applicable
    bool multi_component = false;  // spectral map over a disconnected domain

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

}  // namespace specdist
