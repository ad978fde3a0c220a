#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "specdist/basis.hpp"
#include "specdist/operators.hpp"
#include "specdist/types.hpp"

namespace specdist {

// Rows with gradient norm below this fraction of the largest row are flagged
// degenerate and excluded from the fit.
constexpr double kDegenerateGradientFactor = 1e-12;
// A field whose peak-to-peak variation is below this fraction of its magnitude
// carries no direction information at all: every row is flagged. Legitimate
// kernels from sparse sources have variation on the order of the magnitude.
constexpr double kFlatFieldTolerance = 1e-2;

struct KernelField {
    Eigen::VectorXd values;   // aligned with eval (all vertices when eval is empty)
    std::vector<int> eval;    // empty = all
    Eigen::VectorXd coeffs;   // spectral coefficients: field = phis * coeffs
    double t = 0.0;
    OperatorKind op = OperatorKind::mesh;
    std::vector<int> sources;
};

struct CoefficientVector {
    Eigen::VectorXd a;       // length k; constant-mode entries set by the offset step
    double residual = 0.0;   // fit residual in the solved (possibly weighted) norm
};

struct UnitGradientField {
    Eigen::VectorXd values;           // stacked rows, rows_per_element per element
    std::vector<int> elements;        // empty = all elements
    std::vector<std::uint8_t> degenerate;  // per element
    int rows_per_element = 1;

    int num_elements() const { return static_cast<int>(degenerate.size()); }
};

/** Diffusion time from the area multiplier: t = m * tr(M). */
inline double select_time(const SpectralBasis& basis, double m = 8e-3) {
    if (basis.op != OperatorKind::mesh) throw InvalidArgument("select_time needs a mesh basis");
    if (!(m > 0.0)) throw InvalidArgument("t must be positive");
    return m * basis.mass_trace;
}

/** Walk length for random-walk bases: round(1/lambda_2), clamped to [1, 500]. */
inline int select_walk_steps(const SpectralBasis& basis) {
    if (basis.op != OperatorKind::random_walk)
        throw InvalidArgument("select_walk_steps needs a random-walk basis");
    if (basis.num_constant >= basis.k) return 1;
    const double l2 = basis.lambdas[basis.num_constant];
    if (!(l2 > 0.0)) return 500;
    return std::clamp(static_cast<int>(std::lround(1.0 / l2)), 1, 500);
}

namespace detail {

inline Eigen::VectorXd mean_phi_over_sources(const SpectralBasis& basis, const SourceSet& sources) {
    sources.validate(basis.n);
    Eigen::VectorXd phi_src = Eigen::VectorXd::Zero(basis.k);
    for (int s : sources.indices) phi_src += basis.phis.row(s).transpose();
    return phi_src / static_cast<double>(sources.size());
}

}  // namespace detail

/** Spectral coefficients of the source-averaged kernel: the field is
 *  phis * coeffs. Mesh: coeffs_i = tr(M) e^{-lambda_i t} mean_s phi_i(x_s)
 *  (scale-agnostic form). Random walk: coeffs_i = (1-lambda_i)^t mean_s phi_i(x_s). */
inline Eigen::VectorXd kernel_coefficients(const SpectralBasis& basis, const SourceSet& sources,
                                           double t) {
    Eigen::VectorXd c = detail::mean_phi_over_sources(basis, sources);
    if (basis.op == OperatorKind::mesh) {
        if (!(t > 0.0)) throw InvalidArgument("t must be positive");
        for (int i = 0; i < basis.k; ++i) c[i] *= basis.mass_trace * std::exp(-basis.lambdas[i] * t);
    } else if (basis.op == OperatorKind::random_walk) {
        const int steps = static_cast<int>(t);
        if (steps < 0 || static_cast<double>(steps) != t)
            throw InvalidArgument("random-walk time must be a nonnegative integer");
        for (int i = 0; i < basis.k; ++i) c[i] *= std::pow(1.0 - basis.lambdas[i], steps);
    } else {
        throw InvalidArgument("no kernel for the unnormalized operator; use mesh or rw bases");
    }
    return c;
}

namespace detail {

inline KernelField evaluate_field(const SpectralBasis& basis, Eigen::VectorXd coeffs,
                                  const SourceSet& sources, double t, std::vector<int> eval) {
    KernelField field;
    if (eval.empty()) {
        field.values = basis.phis * coeffs;
    } else {
        field.values.resize(static_cast<Eigen::Index>(eval.size()));
        for (std::size_t i = 0; i < eval.size(); ++i) {
            int v = eval[i];
            if (v < 0 || v >= basis.n)
                throw InvalidArgument("evaluation index " + std::to_string(v) + " out of range");
            field.values[static_cast<Eigen::Index>(i)] = basis.phis.row(v) * coeffs;
        }
    }
    field.eval = std::move(eval);
    field.coeffs = std::move(coeffs);
    field.t = t;
    field.op = basis.op;
    field.sources = sources.indices;
    return field;
}

}  // namespace detail

/** Heat kernel from the source set, averaged over sources, evaluated at all
 *  vertices or at an explicit subset. */
inline KernelField heat_kernel(const SpectralBasis& basis, const SourceSet& sources, double t,
                               std::vector<int> eval = {}) {
    if (basis.op != OperatorKind::mesh) throw InvalidArgument("wrong operator kind: heat kernel needs a mesh basis");
    return detail::evaluate_field(basis, kernel_coefficients(basis, sources, t), sources, t,
                                  std::move(eval));
}

/** Probability-of-arrival kernel after `steps` random-walk steps. */
inline KernelField random_walk_kernel(const SpectralBasis& basis, const SourceSet& sources,
                                      int steps, std::vector<int> eval = {}) {
    if (basis.op != OperatorKind::random_walk)
        throw InvalidArgument("wrong operator kind: random-walk kernel needs an rw basis");
    if (steps < 0) throw InvalidArgument("random-walk time must be a nonnegative integer");
    return detail::evaluate_field(basis, kernel_coefficients(basis, sources, static_cast<double>(steps)),
                                  sources, static_cast<double>(steps), std::move(eval));
}

namespace detail {

/** Normalize stacked gradient rows to unit length per element; flag rows that
 *  carry no usable direction. `field_variation_ratio` (peak-to-peak over max
 *  magnitude of the underlying field, when known) triggers the flat-field
 *  flagging of every element. */
inline UnitGradientField normalize_rows(Eigen::VectorXd grad, std::vector<int> elements,
                                        int rows_per_element, double field_variation_ratio) {
    const int ne = static_cast<int>(grad.size()) / rows_per_element;
    UnitGradientField out;
    out.rows_per_element = rows_per_element;
    out.elements = std::move(elements);
    out.degenerate.assign(static_cast<std::size_t>(ne), 0);

    if (field_variation_ratio < kFlatFieldTolerance) {
        out.values = Eigen::VectorXd::Zero(grad.size());
        std::fill(out.degenerate.begin(), out.degenerate.end(), std::uint8_t{1});
        return out;
    }
    double max_norm = 0.0;
    for (int e = 0; e < ne; ++e)
        max_norm = std::max(max_norm, grad.segment(e * rows_per_element, rows_per_element).norm());
    const double floor = kDegenerateGradientFactor * max_norm;
    for (int e = 0; e < ne; ++e) {
        auto seg = grad.segment(e * rows_per_element, rows_per_element);
        const double nrm = seg.norm();
        if (nrm <= floor || nrm == 0.0) {
            seg.setZero();
            out.degenerate[static_cast<std::size_t>(e)] = 1;
        } else {
            seg /= nrm;
        }
    }
    out.values = std::move(grad);
    return out;
}

inline double variation_ratio(const Eigen::VectorXd& field_values) {
    if (field_values.size() == 0) return kInfinity;
    const double hi = field_values.maxCoeff();
    const double lo = field_values.minCoeff();
    const double mag = std::max(std::abs(hi), std::abs(lo));
    if (mag <= 0.0) return 0.0;
    return (hi - lo) / mag;
}

}  // namespace detail

/** Unit-normalized gradient of a field given at every vertex. Mesh rows become
 *  unit 3-vectors, graph rows ±1; degenerate rows are zeroed and flagged. */
inline UnitGradientField normalized_gradient(const GradientOperator& gradop, const KernelField& field) {
    if (!field.eval.empty())
        throw InvalidArgument("normalized_gradient needs the field at every vertex");
    if (field.values.size() != gradop.op.cols())
        throw InvalidArgument("normalized_gradient: field size mismatch");
    return detail::normalize_rows(gradop.op * field.values, {}, gradop.rows_per_element(),
                                  detail::variation_ratio(field.values));
}

/** Same, through the spectral route: grad h = grad_phis * coeffs, restricted
 *  to an element subset (empty = all). `field_values` feeds the flat-field
 *  guard (pass the kernel values over the evaluation set). */
inline UnitGradientField normalized_gradient_spectral(const SpectralBasis& basis,
                                                      const Eigen::VectorXd& coeffs,
                                                      std::vector<int> elements,
                                                      const Eigen::VectorXd& field_values) {
    const int rpe = basis.rows_per_element();
    Eigen::VectorXd grad;
    if (elements.empty()) {
        grad = basis.grad_phis * coeffs;
    } else {
        grad.resize(static_cast<Eigen::Index>(elements.size()) * rpe);
        for (std::size_t i = 0; i < elements.size(); ++i)
            grad.segment(static_cast<Eigen::Index>(i) * rpe, rpe) =
                basis.grad_phis.middleRows(static_cast<Eigen::Index>(elements[i]) * rpe, rpe) * coeffs;
    }
    return detail::normalize_rows(std::move(grad), std::move(elements), rpe,
                                  detail::variation_ratio(field_values));
}

namespace detail {

struct FitSystem {
    Eigen::MatrixXd matrix;   // usable rows × non-constant columns, weighted
    Eigen::VectorXd rhs;      // matching rows of the unit gradient
    std::vector<Eigen::Index> kept_rows;  // row indices into the unit-gradient stacking
};

inline double element_weight(const SpectralBasis& basis, int element, bool area_weighted) {
    if (area_weighted && basis.domain == DomainKind::mesh && basis.face_areas.size() > 0)
        return std::sqrt(std::max(basis.face_areas[element], 0.0));
    return 1.0;
}

inline FitSystem assemble_fit(const SpectralBasis& basis, const UnitGradientField& g,
                              bool area_weighted) {
    const int rpe = basis.rows_per_element();
    if (g.rows_per_element != rpe) throw InvalidArgument("fit: gradient row layout mismatch");
    const int k_nc = basis.num_nonconstant();
    const int ne = g.num_elements();
    FitSystem sys;
    sys.matrix.resize(static_cast<Eigen::Index>(ne) * rpe, k_nc);
    sys.rhs.resize(static_cast<Eigen::Index>(ne) * rpe);
    Eigen::Index r = 0;
    for (int i = 0; i < ne; ++i) {
        if (g.degenerate[static_cast<std::size_t>(i)]) continue;
        const int element = g.elements.empty() ? i : g.elements[static_cast<std::size_t>(i)];
        const double w = element_weight(basis, element, area_weighted);
        sys.matrix.middleRows(r, rpe) =
            w * basis.grad_phis.block(static_cast<Eigen::Index>(element) * rpe, basis.num_constant,
                                      rpe, k_nc);
        sys.rhs.segment(r, rpe) = w * g.values.segment(static_cast<Eigen::Index>(i) * rpe, rpe);
        for (int d = 0; d < rpe; ++d) sys.kept_rows.push_back(static_cast<Eigen::Index>(i) * rpe + d);
        r += rpe;
    }
    sys.matrix.conservativeResize(r, k_nc);
    sys.rhs.conservativeResize(r);
    return sys;
}

}  // namespace detail

/** Least-squares Fourier coefficients a = (grad Phi)^+ g over the non-constant
 *  modes; constant-mode entries stay 0 for the offset step. Mesh rows are
 *  weighted by sqrt(face area) by default so the objective approximates the
 *  continuous L2 inner product. */
inline CoefficientVector fit_coefficients(const SpectralBasis& basis, const UnitGradientField& g,
                                          bool area_weighted = true) {
    CoefficientVector out;
    out.a = Eigen::VectorXd::Zero(basis.k);
    const int k_nc = basis.num_nonconstant();
    detail::FitSystem sys = detail::assemble_fit(basis, g, area_weighted);
    if (k_nc == 0) {
        out.residual = sys.rhs.norm();
        return out;
    }
    if (sys.matrix.rows() == 0) {
        // every element flagged: nothing to fit, the map is the offset alone
        out.residual = 0.0;
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.matrix);
    cod.setThreshold(kRankThreshold);
    if (cod.rank() < k_nc)
        throw NumericalError("gradient fit rank-deficient after row exclusion; grow the sample set");
    Eigen::VectorXd a_nc = cod.solve(sys.rhs);
    out.a.tail(k_nc) = a_nc;
    out.residual = (sys.matrix * a_nc - sys.rhs).norm();
    return out;
}

/** Choose the constant-mode coefficients: zero value at the source set
 *  (averaged) or nonnegative over the evaluation set. Only constant-mode
 *  entries change. */
inline void set_constant_offset(const SpectralBasis& basis, CoefficientVector& coeffs,
                                const SourceSet& sources, OffsetMode mode,
                                const std::vector<int>& eval = {}) {
    sources.validate(basis.n);
    if (basis.num_constant == 0) return;
    const int nc = basis.num_constant;

    double shift = 0.0;
    if (mode == OffsetMode::zero_at_source) {
        double mean = 0.0;
        for (int s : sources.indices) mean += basis.phis.row(s) * coeffs.a;
        shift = -mean / static_cast<double>(sources.size());
    } else {
        double lo = kInfinity;
        if (eval.empty()) {
            lo = (basis.phis * coeffs.a).minCoeff();
        } else {
            for (int v : eval) lo = std::min(lo, double(basis.phis.row(v) * coeffs.a));
            // the map dips lowest at the sources; a sparse evaluation set may
            // miss that dip, so the sources always join the scan
            for (int v : sources.indices) lo = std::min(lo, double(basis.phis.row(v) * coeffs.a));
        }
        shift = -lo;
    }
    // represent shift * 1 in the constant-mode span (exact on each component)
    Eigen::MatrixXd C;
    if (eval.empty()) {
        C = basis.phis.leftCols(nc);
    } else {
        C.resize(static_cast<Eigen::Index>(eval.size()), nc);
        for (std::size_t i = 0; i < eval.size(); ++i)
            C.row(static_cast<Eigen::Index>(i)) = basis.phis.row(eval[i]).head(nc);
    }
    Eigen::VectorXd target = Eigen::VectorXd::Constant(C.rows(), shift);
    Eigen::VectorXd a_c = C.colPivHouseholderQr().solve(target);
    coeffs.a.head(nc) += a_c;
}

/** d(x) = phi(x) a at the requested vertices (all when empty). O(k) each. */
inline DistanceMap synthesize(const SpectralBasis& basis, const CoefficientVector& coeffs,
                              std::vector<int> targets = {}) {
    DistanceMap map;
    if (targets.empty()) {
        map.values = basis.phis * coeffs.a;
    } else {
        map.values.resize(static_cast<Eigen::Index>(targets.size()));
        for (std::size_t i = 0; i < targets.size(); ++i) {
            int v = targets[i];
            if (v < 0 || v >= basis.n)
                throw InvalidArgument("target index " + std::to_string(v) + " out of range");
            map.values[static_cast<Eigen::Index>(i)] = basis.phis.row(v) * coeffs.a;
        }
    }
    map.targets = std::move(targets);
    map.k = basis.k;
    map.multi_component = basis.num_constant > 1;
    return map;
}

struct DistanceParams {
    double m = 8e-3;                 // heat time multiplier (mesh bases)
    std::optional<double> t;         // explicit diffusion time, overrides m
    std::optional<int> walk_steps;   // rw bases; default round(1/lambda_2)
    bool area_weighted = true;
    OffsetMode offset = OffsetMode::nonnegative;
};

/** Amortized query pipeline: kernel → normalized gradient → coefficient fit →
 *  offset → synthesis. Construction factorizes the retained gradient system;
 *  queries against a built engine reuse it. Full mode fits every gradient row;
 *  sublinear mode fits only rows retained by the basis sample set, making a
 *  single-pair query O(k^2). */
class QueryEngine {
public:
    QueryEngine(const SpectralBasis& basis, QueryMode mode, DistanceParams params = {})
        : basis_(basis), mode_(mode), params_(params) {
        if (basis.op == OperatorKind::unnormalized)
            throw InvalidArgument("distance queries need a mesh or random-walk basis");
        if (basis.op == OperatorKind::mesh) {
            t_ = params.t ? *params.t : select_time(basis, params.m);
            if (!(t_ > 0.0)) throw InvalidArgument("t must be positive");
        } else {
            int steps = params.walk_steps ? *params.walk_steps : select_walk_steps(basis);
            if (steps < 0) throw InvalidArgument("random-walk time must be a nonnegative integer");
            t_ = static_cast<double>(steps);
        }
        if (mode == QueryMode::sublinear) {
            if (!basis.samples) throw InvalidArgument("sublinear mode needs a basis with a sample set");
            fit_elements_ = basis.samples->elements;
            eval_vertices_ = basis.samples->vertices;
        }
        const int rpe = basis.rows_per_element();
        const int k_nc = basis.num_nonconstant();
        if (k_nc > 0) {
            const std::size_t ne = fit_elements_.empty()
                                       ? static_cast<std::size_t>(basis.element_count())
                                       : fit_elements_.size();
            Eigen::MatrixXd A(static_cast<Eigen::Index>(ne) * rpe, k_nc);
            element_weights_.resize(static_cast<Eigen::Index>(ne));
            for (std::size_t i = 0; i < ne; ++i) {
                const int element = fit_elements_.empty() ? static_cast<int>(i) : fit_elements_[i];
                const double w = detail::element_weight(basis, element, params.area_weighted);
                element_weights_[static_cast<Eigen::Index>(i)] = w;
                A.middleRows(static_cast<Eigen::Index>(i) * rpe, rpe) =
                    w * basis.grad_phis.block(static_cast<Eigen::Index>(element) * rpe,
                                              basis.num_constant, rpe, k_nc);
            }
            cod_.setThreshold(kRankThreshold);
            cod_.compute(A);
            if (cod_.rank() < k_nc)
                throw NumericalError("retained gradient rows rank-deficient; grow the sample set");
        }
    }

    double time_parameter() const { return t_; }
    QueryMode mode() const { return mode_; }

    /** Full coefficient solve for a source set (kernel → fit → offset). */
    CoefficientVector solve_coefficients(const SourceSet& sources) const {
        Eigen::VectorXd c = kernel_coefficients(basis_, sources, t_);
        // the kernel decays away from the source while distance grows: flip the
        // field so the fitted gradients point outward
        Eigen::VectorXd field = eval_vertices_.empty()
                                    ? Eigen::VectorXd(basis_.phis * c)
                                    : rows_times(basis_.phis, eval_vertices_, c);
        UnitGradientField g = normalized_gradient_spectral(basis_, Eigen::VectorXd(-c), fit_elements_,
                                                           field);
        CoefficientVector coeffs;
        coeffs.a = Eigen::VectorXd::Zero(basis_.k);
        const int k_nc = basis_.num_nonconstant();
        if (k_nc > 0) {
            bool any_degenerate = false;
            bool all_degenerate = true;
            for (auto f : g.degenerate) {
                any_degenerate = any_degenerate || f;
                all_degenerate = all_degenerate && f;
            }
            if (all_degenerate) {
                coeffs.residual = 0.0;
            } else if (!any_degenerate) {
                Eigen::VectorXd rhs(g.values.size());
                const int rpe = g.rows_per_element;
                for (Eigen::Index i = 0; i < element_weights_.size(); ++i)
                    rhs.segment(i * rpe, rpe) = element_weights_[i] * g.values.segment(i * rpe, rpe);
                Eigen::VectorXd a_nc = cod_.solve(rhs);
                coeffs.a.tail(k_nc) = a_nc;
                coeffs.residual = (rhs - weighted_apply(a_nc)).norm();
            } else {
                coeffs = fit_coefficients(basis_, g, params_.area_weighted);
            }
        }
        set_constant_offset(basis_, coeffs, sources, params_.offset, eval_vertices_);
        return coeffs;
    }

    /** Distance map at every vertex. */
    DistanceMap map(const SourceSet& sources) const {
        DistanceMap out = synthesize(basis_, solve_coefficients(sources));
        tag(out, sources);
        return out;
    }

    /** Distances at chosen targets only. */
    DistanceMap values_at(const SourceSet& sources, std::vector<int> targets) const {
        DistanceMap out = synthesize(basis_, solve_coefficients(sources), std::move(targets));
        tag(out, sources);
        return out;
    }

    /** Single pairwise distance. */
    double pair(int source, int target) const {
        return values_at(SourceSet({source}), {target}).values[0];
    }

private:
    static Eigen::VectorXd rows_times(const Eigen::MatrixXd& mat, const std::vector<int>& rows,
                                      const Eigen::VectorXd& v) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = mat.row(rows[i]) * v;
        return out;
    }

    Eigen::VectorXd weighted_apply(const Eigen::VectorXd& a_nc) const {
        const int rpe = basis_.rows_per_element();
        const int k_nc = basis_.num_nonconstant();
        Eigen::VectorXd out(element_weights_.size() * rpe);
        for (Eigen::Index i = 0; i < element_weights_.size(); ++i) {
            const int element = fit_elements_.empty() ? static_cast<int>(i)
                                                      : fit_elements_[static_cast<std::size_t>(i)];
            out.segment(i * rpe, rpe) =
                element_weights_[i] *
                (basis_.grad_phis.block(static_cast<Eigen::Index>(element) * rpe, basis_.num_constant,
                                        rpe, k_nc) *
                 a_nc);
        }
        return out;
    }

    void tag(DistanceMap& map, const SourceSet& sources) const {
        map.sources = sources.indices;
        map.method = mode_ == QueryMode::full ? "spectral_full" : "spectral_sublinear";
        map.t = t_;
        map.k = basis_.k;
        map.sample_count = basis_.samples ? static_cast<int>(basis_.samples->vertices.size()) : 0;
    }

    const SpectralBasis& basis_;
    QueryMode mode_;
    DistanceParams params_;
    double t_ = 0.0;
    std::vector<int> fit_elements_;   // empty = all elements (full mode)
    std::vector<int> eval_vertices_;  // empty = all vertices (full mode)
    Eigen::VectorXd element_weights_;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

/** One-shot composition of the whole pipeline. */
inline DistanceMap distance(const SpectralBasis& basis, const SourceSet& sources, QueryMode mode,
                            DistanceParams params = {}) {
    return QueryEngine(basis, mode, params).map(sources);
}

}  // namespace specdist
