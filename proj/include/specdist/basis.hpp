#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <zlib.h>

#include <Eigen/Dense>

#include "specdist/eigensolver.hpp"
#include "specdist/operators.hpp"
#include "specdist/types.hpp"

namespace specdist {

// Retained gradient rows count as full rank when sigma_min >= factor * sigma_max.
constexpr double kRankThreshold = 1e-6;
// FPS budget before rank growth: ceil(factor * k) vertices.
constexpr double kDefaultSampleFactor = 1.5;

/** Truncated Laplacian eigenbasis with precomputed eigenfunction gradients —
 *  the persisted amortization artifact. phis columns are B-orthonormal where
 *  B is the mass matrix (mesh), identity (unnormalized) or degree matrix
 *  (random walk); the random-walk eigenproblem is solved in symmetrized
 *  coordinates and mapped back, so phis are usable directly. */
struct SpectralBasis {
    DomainKind domain = DomainKind::mesh;
    OperatorKind op = OperatorKind::mesh;
    int n = 0;
    int k = 0;
    Eigen::VectorXd lambdas;     // ascending
    Eigen::MatrixXd phis;        // n×k
    Eigen::MatrixXd grad_phis;   // (3F or |E|)×k; constant-mode columns exactly zero
    Eigen::VectorXd face_areas;  // mesh: per-face areas (weighting + degeneracy info); empty on graphs
    double mass_trace = 0.0;     // tr(M) on meshes, n on graphs
    int num_constant = 0;        // numerically-zero eigenvalues
    std::optional<SampleSet> samples;

    int rows_per_element() const { return domain == DomainKind::mesh ? 3 : 1; }
    int element_count() const { return static_cast<int>(grad_phis.rows()) / rows_per_element(); }
    int num_nonconstant() const { return k - num_constant; }
};

struct BasisOptions {
    EigenOptions eigen;
    double zero_eigenvalue_factor = 1e-8;  // lambda < factor * max(lambda_k, 1) counts as constant
};

namespace detail {

inline int count_constant_modes(const Eigen::VectorXd& lambdas, double factor) {
    double scale = std::max(lambdas.size() ? lambdas[lambdas.size() - 1] : 0.0, 1.0);
    int c = 0;
    while (c < lambdas.size() && lambdas[c] < factor * scale) ++c;
    return c;
}

inline void zero_constant_gradient_columns(SpectralBasis& basis) {
    for (int i = 0; i < basis.num_constant; ++i) basis.grad_phis.col(i).setZero();
}

}  // namespace detail

/** Mesh basis: generalized problem L_c phi = lambda M phi. */
inline SpectralBasis compute_basis(const TriMesh& mesh, int k, const BasisOptions& opts = {}) {
    const int n = mesh.num_vertices();
    if (k < 1 || k > n) throw InvalidArgument("basis size k must be in [1, n]");
    CotangentOperators cot = cotangent_laplacian(mesh);
    for (int i = 0; i < n; ++i)
        if (!(cot.mass[i] > 0.0))
            throw InvalidArgument("vertex " + std::to_string(i) + " has no incident area");
    EigenResult eig = smallest_eigenpairs(cot.stiffness, cot.mass, k, opts.eigen);
    if (eig.max_residual > opts.eigen.tolerance)
        throw NumericalError("eigensolver residual " + std::to_string(eig.max_residual) +
                                 " above tolerance",
                             eig.max_residual);
    GradientOperator grad = build_gradient(mesh);

    SpectralBasis basis;
    basis.domain = DomainKind::mesh;
    basis.op = OperatorKind::mesh;
    basis.n = n;
    basis.k = k;
    basis.lambdas = std::move(eig.lambdas);
    basis.phis = std::move(eig.vectors);
    basis.grad_phis = grad.op * basis.phis;
    basis.face_areas = grad.face_areas;
    basis.mass_trace = cot.mass.sum();
    basis.num_constant = detail::count_constant_modes(basis.lambdas, opts.zero_eigenvalue_factor);
    detail::zero_constant_gradient_columns(basis);
    return basis;
}

/** Graph basis: L_u phi = lambda phi (unnormalized) or the random-walk
 *  problem L_u phi = lambda A phi, whose eigenvalues are those of L_rw. */
inline SpectralBasis compute_basis(const WeightedGraph& graph, OperatorKind op, int k,
                                   const BasisOptions& opts = {}) {
    const int n = graph.num_vertices();
    if (k < 1 || k > n) throw InvalidArgument("basis size k must be in [1, n]");
    if (op == OperatorKind::mesh) throw InvalidArgument("mesh operator needs a TriMesh");

    Eigen::VectorXd b_diag;
    if (op == OperatorKind::random_walk) {
        b_diag = degree_vector(graph);
        for (int v = 0; v < n; ++v)
            if (b_diag[v] <= 0.0) throw InvalidArgument("zero degree at vertex " + std::to_string(v));
    } else {
        b_diag = Eigen::VectorXd::Ones(n);
    }
    SparseMatrix L = unnormalized_laplacian(graph);
    EigenResult eig = smallest_eigenpairs(L, b_diag, k, opts.eigen);
    if (eig.max_residual > opts.eigen.tolerance)
        throw NumericalError("eigensolver residual " + std::to_string(eig.max_residual) +
                                 " above tolerance",
                             eig.max_residual);
    GradientOperator grad = build_gradient(graph);

    SpectralBasis basis;
    basis.domain = DomainKind::graph;
    basis.op = op;
    basis.n = n;
    basis.k = k;
    basis.lambdas = std::move(eig.lambdas);
    basis.phis = std::move(eig.vectors);
    basis.grad_phis = grad.op * basis.phis;
    basis.mass_trace = static_cast<double>(n);
    basis.num_constant = detail::count_constant_modes(basis.lambdas, opts.zero_eigenvalue_factor);
    detail::zero_constant_gradient_columns(basis);
    return basis;
}

/** B-weighted spectral coefficients of a vertex function: a = Phi^T diag(b) f.
 *  With a B-orthonormal basis this is the L2-optimal projection. */
inline Eigen::VectorXd project_coefficients(const SpectralBasis& basis, const Eigen::VectorXd& b_diag,
                                            const Eigen::VectorXd& values) {
    if (values.size() != basis.n || b_diag.size() != basis.n)
        throw InvalidArgument("projection: size mismatch");
    return basis.phis.transpose() * b_diag.cwiseProduct(values);
}

inline Eigen::VectorXd reconstruct(const SpectralBasis& basis, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis.k) throw InvalidArgument("reconstruct: coefficient size mismatch");
    return basis.phis * coeffs;
}

// ---------------------------------------------------------------------------
// Persistence: little-endian binary container, layout in docs/basis_format.md.

namespace detail {

constexpr char kBasisMagic[8] = {'S', 'P', 'D', 'B', 'A', 'S', '0', '1'};
constexpr std::uint32_t kBasisVersion = 1;
constexpr std::uint32_t kFlagSamples = 1u << 0;
constexpr std::uint32_t kFlagFaceAreas = 1u << 1;

class CrcWriter {
public:
    explicit CrcWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write basis file: " + path);
    }
    void write(const void* data, std::size_t len) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        crc_ = crc32(crc_, static_cast<const Bytef*>(data), static_cast<uInt>(len));
    }
    template <typename T>
    void write_pod(const T& value) {
        write(&value, sizeof(T));
    }
    void finish(const std::string& path) {
        std::uint32_t crc = static_cast<std::uint32_t>(crc_);
        out_.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
        out_.flush();
        if (!out_) throw IoError("write failed: " + path);
    }

private:
    std::ofstream out_;
    uLong crc_ = crc32(0L, nullptr, 0);
};

class BufferReader {
public:
    BufferReader(const std::vector<char>& buf, const std::string& path) : buf_(buf), path_(path) {}
    void read(void* dst, std::size_t len) {
        if (pos_ + len > buf_.size()) throw IoError("basis file truncated: " + path_);
        std::memcpy(dst, buf_.data() + pos_, len);
        pos_ += len;
    }
    template <typename T>
    T read_pod() {
        T value;
        read(&value, sizeof(T));
        return value;
    }

private:
    const std::vector<char>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_basis(const SpectralBasis& basis, const std::string& path) {
    detail::CrcWriter w(path);
    w.write(detail::kBasisMagic, sizeof(detail::kBasisMagic));
    w.write_pod(detail::kBasisVersion);
    w.write_pod(static_cast<std::uint32_t>(basis.domain));
    w.write_pod(static_cast<std::uint32_t>(basis.op));
    w.write_pod(static_cast<std::uint32_t>(basis.num_constant));
    w.write_pod(static_cast<std::uint64_t>(basis.n));
    w.write_pod(static_cast<std::uint64_t>(basis.k));
    w.write_pod(static_cast<std::uint64_t>(basis.element_count()));
    w.write_pod(static_cast<std::uint64_t>(basis.grad_phis.rows()));
    w.write_pod(basis.mass_trace);
    std::uint32_t flags = 0;
    if (basis.samples) flags |= detail::kFlagSamples;
    if (basis.face_areas.size() > 0) flags |= detail::kFlagFaceAreas;
    w.write_pod(flags);
    w.write_pod(std::uint32_t{0});  // reserved
    const SampleSet empty_samples;
    const SampleSet& s = basis.samples ? *basis.samples : empty_samples;
    w.write_pod(static_cast<std::uint64_t>(s.vertices.size()));
    w.write_pod(static_cast<std::uint64_t>(s.elements.size()));
    w.write_pod(static_cast<std::uint64_t>(s.seed_vertex));
    w.write_pod(static_cast<std::uint32_t>(s.oracle));
    w.write_pod(std::uint32_t{0});  // reserved

    w.write(basis.lambdas.data(), sizeof(double) * static_cast<std::size_t>(basis.lambdas.size()));
    w.write(basis.phis.data(), sizeof(double) * static_cast<std::size_t>(basis.phis.size()));
    w.write(basis.grad_phis.data(), sizeof(double) * static_cast<std::size_t>(basis.grad_phis.size()));
    if (flags & detail::kFlagFaceAreas)
        w.write(basis.face_areas.data(), sizeof(double) * static_cast<std::size_t>(basis.face_areas.size()));
    if (basis.samples) {
        for (int v : s.vertices) w.write_pod(static_cast<std::uint64_t>(v));
        for (int e : s.elements) w.write_pod(static_cast<std::uint64_t>(e));
        std::vector<double> radii = s.cover_radii;
        radii.resize(s.vertices.size(), 0.0);
        w.write(radii.data(), sizeof(double) * radii.size());
    }
    w.finish(path);
}

inline SpectralBasis load_basis(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open basis file: " + path);
    const std::streamsize size = in.tellg();
    if (size < static_cast<std::streamsize>(sizeof(detail::kBasisMagic) + 4))
        throw IoError("basis file truncated: " + path);
    std::vector<char> buf(static_cast<std::size_t>(size));
    in.seekg(0);
    in.read(buf.data(), size);
    if (!in) throw IoError("read failed: " + path);

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
    uLong crc = crc32(0L, nullptr, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - 4));
    if (static_cast<std::uint32_t>(crc) != stored_crc)
        throw IoError("basis file checksum mismatch: " + path);

    detail::BufferReader r(buf, path);
    char magic[8];
    r.read(magic, 8);
    if (std::memcmp(magic, detail::kBasisMagic, 8) != 0)
        throw IoError("not a basis file: " + path);
    const auto version = r.read_pod<std::uint32_t>();
    if (version != detail::kBasisVersion)
        throw IoError("unsupported basis file version " + std::to_string(version) + ": " + path);

    SpectralBasis basis;
    basis.domain = static_cast<DomainKind>(r.read_pod<std::uint32_t>());
    basis.op = static_cast<OperatorKind>(r.read_pod<std::uint32_t>());
    basis.num_constant = static_cast<int>(r.read_pod<std::uint32_t>());
    basis.n = static_cast<int>(r.read_pod<std::uint64_t>());
    basis.k = static_cast<int>(r.read_pod<std::uint64_t>());
    const auto element_count = static_cast<Eigen::Index>(r.read_pod<std::uint64_t>());
    const auto gradient_rows = static_cast<Eigen::Index>(r.read_pod<std::uint64_t>());
    basis.mass_trace = r.read_pod<double>();
    const auto flags = r.read_pod<std::uint32_t>();
    r.read_pod<std::uint32_t>();
    const auto sample_vertex_count = r.read_pod<std::uint64_t>();
    const auto sample_element_count = r.read_pod<std::uint64_t>();
    const auto sample_seed = r.read_pod<std::uint64_t>();
    const auto sample_oracle = r.read_pod<std::uint32_t>();
    r.read_pod<std::uint32_t>();

    basis.lambdas.resize(basis.k);
    r.read(basis.lambdas.data(), sizeof(double) * static_cast<std::size_t>(basis.k));
    basis.phis.resize(basis.n, basis.k);
    r.read(basis.phis.data(), sizeof(double) * static_cast<std::size_t>(basis.phis.size()));
    basis.grad_phis.resize(gradient_rows, basis.k);
    r.read(basis.grad_phis.data(), sizeof(double) * static_cast<std::size_t>(basis.grad_phis.size()));
    if (flags & detail::kFlagFaceAreas) {
        basis.face_areas.resize(element_count);
        r.read(basis.face_areas.data(), sizeof(double) * static_cast<std::size_t>(element_count));
    }
    if (flags & detail::kFlagSamples) {
        SampleSet s;
        s.seed_vertex = static_cast<int>(sample_seed);
        s.oracle = static_cast<OracleKind>(sample_oracle);
        s.vertices.resize(sample_vertex_count);
        for (auto& v : s.vertices) v = static_cast<int>(r.read_pod<std::uint64_t>());
        s.elements.resize(sample_element_count);
        for (auto& e : s.elements) e = static_cast<int>(r.read_pod<std::uint64_t>());
        s.cover_radii.resize(sample_vertex_count);
        r.read(s.cover_radii.data(), sizeof(double) * s.cover_radii.size());
        basis.samples = std::move(s);
    }
    return basis;
}

}  // namespace specdist
