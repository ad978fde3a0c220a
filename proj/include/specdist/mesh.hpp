#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specdist/graph.hpp"
#include "specdist/types.hpp"

namespace specdist {

/** Triangle mesh: n×3 vertex coordinates, F×3 counterclockwise faces. */
struct TriMesh {
    Eigen::MatrixX3d vertices;
    Eigen::MatrixX3i faces;

    int num_vertices() const { return static_cast<int>(vertices.rows()); }
    int num_faces() const { return static_cast<int>(faces.rows()); }

    Eigen::Vector3d face_normal_scaled(int f) const {  // cross product, |.| = 2*area
        Eigen::Vector3d a = vertices.row(faces(f, 0));
        Eigen::Vector3d b = vertices.row(faces(f, 1));
        Eigen::Vector3d c = vertices.row(faces(f, 2));
        return (b - a).cross(c - a);
    }

    double face_area(int f) const { return 0.5 * face_normal_scaled(f).norm(); }

    double total_area() const {
        double s = 0.0;
        for (int f = 0; f < num_faces(); ++f) s += face_area(f);
        return s;
    }

    double bbox_diagonal() const {
        if (num_vertices() == 0) return 0.0;
        Eigen::Vector3d lo = vertices.colwise().minCoeff();
        Eigen::Vector3d hi = vertices.colwise().maxCoeff();
        return (hi - lo).norm();
    }

    /** Faces incident on each vertex, ascending face ids. */
    std::vector<std::vector<int>> vertex_face_incidence() const {
        std::vector<std::vector<int>> inc(static_cast<std::size_t>(num_vertices()));
        for (int f = 0; f < num_faces(); ++f)
            for (int c = 0; c < 3; ++c) inc[static_cast<std::size_t>(faces(f, c))].push_back(f);
        return inc;
    }
};

// Faces with area below this fraction of bbox_diagonal^2 are degenerate.
constexpr double kDegenerateAreaFactor = 1e-12;

struct MeshLoadOptions {
    bool drop_degenerate_faces = false;
    std::vector<std::string>* warnings = nullptr;  // optional sink
};

namespace detail {

inline void mesh_validate_and_finalize(TriMesh& mesh, std::vector<std::array<int, 3>>& tris,
                                       const std::string& path, const MeshLoadOptions& opts) {
    const int n = mesh.num_vertices();
    for (const auto& t : tris) {
        for (int c = 0; c < 3; ++c)
            if (t[static_cast<std::size_t>(c)] < 0 || t[static_cast<std::size_t>(c)] >= n)
                throw IoError(path + ": face index " + std::to_string(t[static_cast<std::size_t>(c)]) +
                              " out of range for " + std::to_string(n) + " vertices");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw IoError(path + ": face with repeated vertex index");
    }
    // degeneracy pass needs coordinates, so faces are staged first
    Eigen::Vector3d lo = mesh.vertices.colwise().minCoeff();
    Eigen::Vector3d hi = mesh.vertices.colwise().maxCoeff();
    const double diag2 = (hi - lo).squaredNorm();
    const double tol = kDegenerateAreaFactor * diag2;
    std::vector<std::array<int, 3>> kept;
    kept.reserve(tris.size());
    for (std::size_t f = 0; f < tris.size(); ++f) {
        const auto& t = tris[f];
        Eigen::Vector3d a = mesh.vertices.row(t[0]);
        Eigen::Vector3d b = mesh.vertices.row(t[1]);
        Eigen::Vector3d c = mesh.vertices.row(t[2]);
        double area = 0.5 * (b - a).cross(c - a).norm();
        if (area < tol) {
            if (opts.warnings)
                opts.warnings->push_back("face " + std::to_string(f) + " is degenerate (area " +
                                         std::to_string(area) + ")" +
                                         (opts.drop_degenerate_faces ? ", dropped" : ", retained"));
            if (opts.drop_degenerate_faces) continue;
        }
        kept.push_back(t);
    }
    mesh.faces.resize(static_cast<Eigen::Index>(kept.size()), 3);
    for (std::size_t f = 0; f < kept.size(); ++f)
        for (int c = 0; c < 3; ++c) mesh.faces(static_cast<Eigen::Index>(f), c) = kept[f][static_cast<std::size_t>(c)];
}

inline std::string next_content_line(std::istream& in, int& lineno) {
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    return {};
}

}  // namespace detail

/** OFF loader. Indices are 0-based per the format; polygons are fan-triangulated. */
inline TriMesh load_off(const std::string& path, const MeshLoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh: " + path);
    int lineno = 0;
    std::string header = detail::next_content_line(in, lineno);
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "OFF") throw IoError(path + ": not an OFF file");

    long long nv = -1, nf = -1, ne = -1;
    // counts may share the OFF line or follow it
    if (!(hs >> nv >> nf >> ne)) {
        std::istringstream cs(detail::next_content_line(in, lineno));
        if (!(cs >> nv >> nf >> ne)) throw IoError(path + ": malformed OFF counts");
    }
    if (nv < 0 || nf < 0) throw IoError(path + ": malformed OFF counts");

    TriMesh mesh;
    mesh.vertices.resize(nv, 3);
    for (long long v = 0; v < nv; ++v) {
        std::istringstream vs(detail::next_content_line(in, lineno));
        double x, y, z;
        if (!(vs >> x >> y >> z)) throw IoError(path + ": malformed vertex at line " + std::to_string(lineno));
        mesh.vertices.row(v) << x, y, z;
    }
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(nf));
    for (long long f = 0; f < nf; ++f) {
        std::istringstream fs(detail::next_content_line(in, lineno));
        int cnt;
        if (!(fs >> cnt) || cnt < 3) throw IoError(path + ": malformed face at line " + std::to_string(lineno));
        std::vector<int> poly(static_cast<std::size_t>(cnt));
        for (int c = 0; c < cnt; ++c)
            if (!(fs >> poly[static_cast<std::size_t>(c)]))
                throw IoError(path + ": malformed face at line " + std::to_string(lineno));
        for (int c = 1; c + 1 < cnt; ++c)
            tris.push_back({poly[0], poly[static_cast<std::size_t>(c)], poly[static_cast<std::size_t>(c + 1)]});
    }
    detail::mesh_validate_and_finalize(mesh, tris, path, opts);
    return mesh;
}

/** OBJ loader: `v` and `f` records only; 1-based indices converted; normals,
 *  texture coordinates, and materials are ignored. */
inline TriMesh load_obj(const std::string& path, const MeshLoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh: " + path);
    std::vector<Eigen::Vector3d> verts;
    std::vector<std::array<int, 3>> tris;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw IoError(path + ":" + std::to_string(lineno) + ": malformed vertex");
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string vert_spec;
            while (ls >> vert_spec) {
                // "idx", "idx/t", "idx/t/n", "idx//n"
                std::size_t slash = vert_spec.find('/');
                std::string idx_str = (slash == std::string::npos) ? vert_spec : vert_spec.substr(0, slash);
                int idx;
                try {
                    idx = std::stoi(idx_str);
                } catch (const std::exception&) {
                    throw IoError(path + ":" + std::to_string(lineno) + ": malformed face index '" +
                                  vert_spec + "'");
                }
                if (idx == 0) throw IoError(path + ":" + std::to_string(lineno) + ": OBJ indices are 1-based");
                // negative = relative to the current vertex count
                poly.push_back(idx > 0 ? idx - 1 : static_cast<int>(verts.size()) + idx);
            }
            if (poly.size() < 3)
                throw IoError(path + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
            for (std::size_t c = 1; c + 1 < poly.size(); ++c)
                tris.push_back({poly[0], poly[c], poly[c + 1]});
        }
        // vn/vt/usemtl/... skipped
    }
    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t v = 0; v < verts.size(); ++v) mesh.vertices.row(static_cast<Eigen::Index>(v)) = verts[v];
    detail::mesh_validate_and_finalize(mesh, tris, path, opts);
    return mesh;
}

/** Load a mesh, dispatching on file extension (.off / .obj). */
inline TriMesh load_mesh(const std::string& path, const MeshLoadOptions& opts = {}) {
    auto dot = path.find_last_of('.');
    std::string ext = (dot == std::string::npos) ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == "off") return load_off(path, opts);
    if (ext == "obj") return load_obj(path, opts);
    throw IoError("unsupported mesh format: " + path);
}

inline void write_off(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh: " + path);
    out << "OFF\n" << mesh.num_vertices() << " " << mesh.num_faces() << " 0\n";
    out.precision(17);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        out << mesh.vertices(v, 0) << " " << mesh.vertices(v, 1) << " " << mesh.vertices(v, 2) << "\n";
    for (int f = 0; f < mesh.num_faces(); ++f)
        out << "3 " << mesh.faces(f, 0) << " " << mesh.faces(f, 1) << " " << mesh.faces(f, 2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

/** Edge graph of a mesh: one undirected edge per mesh edge, weighted by
 *  Euclidean length, so Dijkstra on the result is the edge-restricted geodesic. */
inline WeightedGraph mesh_to_graph(const TriMesh& mesh) {
    std::map<std::pair<int, int>, double> edge_set;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        for (int c = 0; c < 3; ++c) {
            int a = mesh.faces(f, c);
            int b = mesh.faces(f, (c + 1) % 3);
            auto key = std::minmax(a, b);
            double len = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
            edge_set[{key.first, key.second}] = len;
        }
    }
    std::vector<GraphEdge> edges;
    edges.reserve(edge_set.size());
    for (const auto& [key, w] : edge_set) edges.push_back({key.first, key.second, w});
    return WeightedGraph(mesh.num_vertices(), std::move(edges));
}

}  // namespace specdist
