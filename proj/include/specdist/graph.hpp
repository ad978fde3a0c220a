#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specdist/types.hpp"

namespace specdist {

struct GraphEdge {
    int i = 0;  // canonical: i < j
    int j = 0;
    double w = 0.0;
};

inline bool operator==(const GraphEdge& a, const GraphEdge& b) {
    return a.i == b.i && a.j == b.j && a.w == b.w;
}

/** Undirected weighted graph. Immutable after construction; edges are kept in
 *  canonical (i < j) form, sorted lexicographically, one per unordered pair. */
class WeightedGraph {
public:
    WeightedGraph() = default;

    WeightedGraph(int n, std::vector<GraphEdge> edges) : n_(n) {
        if (n < 0) throw InvalidArgument("vertex count must be nonnegative");
        for (auto& e : edges) {
            if (e.i == e.j)
                throw InvalidArgument("self-loop at vertex " + std::to_string(e.i));
            if (e.i > e.j) std::swap(e.i, e.j);
            if (e.i < 0 || e.j >= n)
                throw InvalidArgument("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                      ") out of range for n=" + std::to_string(n));
            if (!(e.w >= 0.0) || !std::isfinite(e.w))
                throw InvalidArgument("negative weight on edge (" + std::to_string(e.i) + "," +
                                      std::to_string(e.j) + ")");
        }
        std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        for (std::size_t m = 1; m < edges.size(); ++m) {
            if (edges[m - 1].i == edges[m].i && edges[m - 1].j == edges[m].j)
                throw InvalidArgument("duplicate edge (" + std::to_string(edges[m].i) + "," +
                                      std::to_string(edges[m].j) + ")");
        }
        edges_ = std::move(edges);
        adjacency_.assign(static_cast<std::size_t>(n_), {});
        for (const auto& e : edges_) {
            adjacency_[static_cast<std::size_t>(e.i)].push_back({e.j, e.w});
            adjacency_[static_cast<std::size_t>(e.j)].push_back({e.i, e.w});
        }
        for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    }

    int num_vertices() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    const std::vector<std::pair<int, double>>& neighbors(int v) const {
        return adjacency_[static_cast<std::size_t>(v)];
    }

    double degree(int v) const {
        double d = 0.0;
        for (const auto& [u, w] : neighbors(v)) d += w;
        return d;
    }

    bool is_connected() const {
        if (n_ == 0) return true;
        std::vector<bool> seen(static_cast<std::size_t>(n_), false);
        std::vector<int> stack = {0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (const auto& [u, w] : neighbors(v)) {
                if (!seen[static_cast<std::size_t>(u)]) {
                    seen[static_cast<std::size_t>(u)] = true;
                    ++count;
                    stack.push_back(u);
                }
            }
        }
        return count == n_;
    }

private:
    int n_ = 0;
    std::vector<GraphEdge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/** Parse an edge-list file: one `i <ws> j <ws> w` triple per line, 0-based
 *  indices, strictly positive weights. `#` starts a comment; the special
 *  comment `# n=<count>` pins the vertex count. */
inline WeightedGraph load_graph_edgelist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path);

    std::vector<GraphEdge> edges;
    int n_header = -1;
    int max_index = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fail = [&](const std::string& what) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + what);
        };
        std::string content = line;
        if (auto pos = content.find('#'); pos != std::string::npos) {
            std::string comment = content.substr(pos + 1);
            content = content.substr(0, pos);
            std::istringstream cs(comment);
            std::string tok;
            if (cs >> tok && tok.rfind("n=", 0) == 0) {
                try {
                    n_header = std::stoi(tok.substr(2));
                } catch (const std::exception&) {
                    fail("malformed header '" + tok + "'");
                }
            }
        }
        std::istringstream ls(content);
        long long i, j;
        double w;
        if (!(ls >> i)) continue;  // blank / comment-only line
        if (!(ls >> j >> w)) fail("malformed line (expected 'i j w')");
        std::string rest;
        if (ls >> rest) fail("trailing tokens after 'i j w'");
        if (i < 0 || j < 0) fail("negative vertex index");
        if (i == j) fail("self-loop at vertex " + std::to_string(i));
        if (!std::isfinite(w)) fail("non-finite weight");
        if (w < 0.0) fail("negative weight");
        if (w == 0.0) fail("zero-weight edge");
        edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
        max_index = std::max(max_index, static_cast<int>(std::max(i, j)));
    }
    int n = (n_header >= 0) ? n_header : max_index + 1;
    if (max_index >= n)
        throw IoError(path + ": header n=" + std::to_string(n) +
                      " but edge references vertex " + std::to_string(max_index));
    try {
        return WeightedGraph(n, std::move(edges));
    } catch (const InvalidArgument& err) {
        throw IoError(path + ": " + err.what());
    }
}

inline void save_graph_edgelist(const WeightedGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write edge list: " + path);
    out << "# n=" << g.num_vertices() << "\n";
    out.precision(17);
    for (const auto& e : g.edges()) out << e.i << "\t" << e.j << "\t" << e.w << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace specdist
