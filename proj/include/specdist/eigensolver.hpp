#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "specdist/rng.hpp"
#include "specdist/types.hpp"

namespace specdist {

struct EigenOptions {
    double tolerance = 1e-8;        // residual bound on ||L phi - lambda M phi|| with ||phi||_M = 1
    int iteration_cap_factor = 50;  // basis vectors generated <= factor * k
    int block_size = 8;
    int dense_threshold = 400;      // n at or below which the dense path is used
    std::uint64_t seed = 0x5eed5eed5eedull;
};

struct EigenResult {
    Eigen::VectorXd lambdas;  // ascending, size k
    Eigen::MatrixXd vectors;  // n×k, B-orthonormal: vectors^T diag(b) vectors = I
    int iterations = 0;       // Krylov vectors generated (0 for the dense path)
    double max_residual = 0.0;
};

namespace detail {

/** Deterministic sign convention: largest-magnitude entry positive. */
inline void fix_signs(Eigen::MatrixXd& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
            double a = std::abs(vecs(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (vecs(best, c) < 0.0) vecs.col(c) = -vecs.col(c);
    }
}

/** Residual columns of B X - X diag(mu), scaled by d_max to bound the
 *  original-coordinate residual ||L phi - lambda M phi||. */
inline double symmetric_residual(const Eigen::SparseMatrix<double>& B, const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& mu, double d_max) {
    Eigen::MatrixXd R = B * X - X * mu.asDiagonal();
    double worst = 0.0;
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        worst = std::max(worst, R.col(c).norm() / std::max(X.col(c).norm(), 1e-300));
    return worst * d_max;
}

}  // namespace detail

/** Smallest k eigenpairs of the generalized problem L x = lambda diag(b) x,
 *  L sparse symmetric PSD, b positive. Solved on the symmetrized operator
 *  B = D^{-1} L D^{-1} (D = diag(sqrt(b))); eigenvectors are returned in the
 *  original coordinates, B-orthonormal, signs fixed, eigenvalues ascending. */
inline EigenResult smallest_eigenpairs(const Eigen::SparseMatrix<double>& L,
                                       const Eigen::VectorXd& b_diag, int k,
                                       const EigenOptions& opts = {}) {
    const int n = static_cast<int>(L.rows());
    if (L.cols() != n) throw InvalidArgument("eigensolver: matrix must be square");
    if (b_diag.size() != n) throw InvalidArgument("eigensolver: weight vector size mismatch");
    if (k < 1 || k > n) throw InvalidArgument("eigensolver: need 1 <= k <= n");
    for (int i = 0; i < n; ++i)
        if (!(b_diag[i] > 0.0)) throw InvalidArgument("eigensolver: nonpositive weight at " + std::to_string(i));

    const Eigen::VectorXd d = b_diag.cwiseSqrt();
    const double d_max = d.maxCoeff();
    const Eigen::VectorXd d_inv = d.cwiseInverse();

    // B = D^{-1} L D^{-1}
    Eigen::SparseMatrix<double> B = L;
    for (int col = 0; col < B.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(B, col); it; ++it)
            it.valueRef() *= d_inv[it.row()] * d_inv[it.col()];

    const double tol_sym = opts.tolerance / std::max(1.0, d_max);

    auto finalize = [&](Eigen::VectorXd lambdas, Eigen::MatrixXd X, int iters) {
        for (Eigen::Index i = 0; i < lambdas.size(); ++i)
            if (lambdas[i] < 0.0) lambdas[i] = (lambdas[i] > -1e2 * tol_sym) ? 0.0 : lambdas[i];
        EigenResult res;
        res.max_residual = detail::symmetric_residual(B, X, lambdas, d_max);
        res.lambdas = std::move(lambdas);
        res.vectors = d_inv.asDiagonal() * X;
        detail::fix_signs(res.vectors);
        res.iterations = iters;
        return res;
    };

    // Dense path: small problems, or k too close to n for a Krylov space to pay off.
    if (n <= opts.dense_threshold || 3 * k > n) {
        if (n > 20000) throw InvalidArgument("eigensolver: dense fallback infeasible at n=" + std::to_string(n));
        Eigen::MatrixXd Bd(B);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bd);
        if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
        return finalize(es.eigenvalues().head(k), es.eigenvectors().leftCols(k), 0);
    }

    // Shift so the PSD operator becomes definite. The shift must sit far below
    // the wanted eigenvalue band (the matrix scale vastly overestimates it on
    // fine meshes), or the inverted band compresses and the tail stalls.
    const double diag_mean = Eigen::VectorXd(B.diagonal()).mean();
    const double tau = std::max(1e-6 * diag_mean, 1e-12);
    Eigen::SparseMatrix<double> K = B;
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    K += tau * I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigensolver: factorization of the shifted operator failed");

    // Block Krylov with explicit Rayleigh-Ritz on H = V^T K^{-1} V.
    const int pad = std::max(16, k / 8);
    const int m_cap = std::min(n, std::min(opts.iteration_cap_factor * k,
                                           std::max(4 * k + 2 * pad, 160)));
    const int b = std::min(opts.block_size, m_cap);
    Eigen::MatrixXd V(n, m_cap);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m_cap, m_cap);
    Rng rng(opts.seed);
    int m = 0;

    auto append_orthonormal = [&](Eigen::MatrixXd block) -> int {
        // repeated Gram-Schmidt against V; a small surviving remainder is the
        // informative continuation direction, so only true breakdowns get a
        // random replacement
        int appended = 0;
        for (Eigen::Index c = 0; c < block.cols() && m < m_cap; ++c) {
            Eigen::VectorXd v = block.col(c);
            double initial_norm = v.norm();
            if (initial_norm <= 0.0 || !std::isfinite(initial_norm)) continue;
            double nrm = initial_norm;
            for (int pass = 0; pass < 4; ++pass) {
                if (m > 0) v -= V.leftCols(m) * (V.leftCols(m).transpose() * v);
                double next = v.norm();
                if (pass > 0 && next > 0.5 * nrm) {
                    nrm = next;
                    break;  // orthogonality settled
                }
                nrm = next;
            }
            if (nrm < 1e-13 * initial_norm || nrm < 1e-300) {
                for (int i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
                for (int pass = 0; pass < 3; ++pass)
                    if (m > 0) v -= V.leftCols(m) * (V.leftCols(m).transpose() * v);
                nrm = v.norm();
                if (nrm < 1e-300) continue;
            }
            V.col(m) = v / nrm;
            ++m;
            ++appended;
        }
        return appended;
    };

    {
        Eigen::MatrixXd start(n, b);
        for (int c = 0; c < b; ++c)
            for (int i = 0; i < n; ++i) start(i, c) = rng.uniform() - 0.5;
        append_orthonormal(std::move(start));
    }

    int block_lo = 0;  // columns [block_lo, m) have no H entries yet
    Eigen::MatrixXd U;  // K^{-1} times the latest block
    Eigen::VectorXd best_mu;
    Eigen::MatrixXd best_X;
    double best_res = kInfinity;
    // explicit residual checks cost an n·m·k product; space them geometrically
    int next_check = std::min(m_cap, k + std::min(pad, 16));
    int check_interval = 2 * b;

    while (true) {
        // extend H with the new block and produce the next candidate block
        const int bw = m - block_lo;
        U = solver.solve(V.middleCols(block_lo, bw));
        Eigen::MatrixXd C = V.leftCols(m).transpose() * U;  // m×bw
        H.block(0, block_lo, m, bw) = C;
        H.block(block_lo, 0, bw, m) = C.transpose();
        block_lo = m;

        const bool full = (m >= m_cap);
        if (m >= next_check || full) {
            next_check = m + check_interval;
            check_interval *= 2;
            Eigen::MatrixXd Hm = 0.5 * (H.topLeftCorner(m, m) + H.topLeftCorner(m, m).transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(Hm);
            // largest theta of K^{-1} correspond to the smallest mu of B
            Eigen::VectorXd mu(k);
            Eigen::MatrixXd S(m, k);
            for (int i = 0; i < k; ++i) {
                double theta = hs.eigenvalues()[m - 1 - i];
                mu[i] = (theta > 0.0) ? (1.0 / theta - tau) : kInfinity;
                S.col(i) = hs.eigenvectors().col(m - 1 - i);
            }
            Eigen::MatrixXd X = V.leftCols(m) * S;
            double res = detail::symmetric_residual(B, X, mu, d_max);
            if (res < best_res) {
                best_res = res;
                best_mu = mu;
                best_X = X;
            }
            if (res <= opts.tolerance) {
                // mu ascending by construction; enforce exact ordering anyway
                std::vector<int> order(static_cast<std::size_t>(k));
                for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
                std::sort(order.begin(), order.end(), [&](int a, int c) { return mu[a] < mu[c]; });
                Eigen::VectorXd mu_sorted(k);
                Eigen::MatrixXd X_sorted(n, k);
                for (int i = 0; i < k; ++i) {
                    mu_sorted[i] = mu[order[static_cast<std::size_t>(i)]];
                    X_sorted.col(i) = X.col(order[static_cast<std::size_t>(i)]);
                }
                return finalize(mu_sorted, X_sorted, m);
            }
            if (full) break;
        }
        if (m >= m_cap) break;
        append_orthonormal(std::move(U));
        if (m == block_lo) break;  // no direction could be appended
    }

    // Krylov budget exhausted: fall back to dense where feasible, else report.
    if (n <= 6000) {
        Eigen::MatrixXd Bd(B);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bd);
        if (es.info() == Eigen::Success)
            return finalize(es.eigenvalues().head(k), es.eigenvectors().leftCols(k), m);
    }
    throw NumericalError("eigensolver did not converge within the iteration budget (residual " +
                             std::to_string(best_res) + ")",
                         best_res);
}

}  // namespace specdist
