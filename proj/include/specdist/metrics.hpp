#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specdist/types.hpp"

namespace specdist {

// epsilon in the relative-error denominator, as a fraction of the diameter
constexpr double kRelativeErrorEpsilonFactor = 1e-3;

/** Error statistics of one distance map against a reference, in percent of
 *  the domain diameter (relative error in plain percent). */
struct ErrorReport {
    double relative_mean = 0.0;  // %
    double l2 = 0.0;             // % of diameter
    double linf = 0.0;           // % of diameter
    std::optional<double> kendall_tau;  // fraction in [0, 1]
    int n_compared = 0;
    int excluded = 0;  // non-finite entries skipped
};

/** Compare a map against a reference over the same vertex set. */
inline ErrorReport compare(const DistanceMap& d, const DistanceMap& ref, double diameter) {
    if (d.values.size() != ref.values.size())
        throw InvalidArgument("compare: length mismatch (" + std::to_string(d.values.size()) +
                              " vs " + std::to_string(ref.values.size()) + ")");
    if (!(diameter > 0.0)) throw InvalidArgument("compare: diameter must be positive");
    const double eps = kRelativeErrorEpsilonFactor * diameter;
    ErrorReport rep;
    double sq = 0.0, rel = 0.0, worst = 0.0;
    for (Eigen::Index i = 0; i < d.values.size(); ++i) {
        const double a = d.values[i], b = ref.values[i];
        if (!std::isfinite(a) || !std::isfinite(b)) {
            ++rep.excluded;
            continue;
        }
        const double diff = std::abs(a - b);
        sq += diff * diff;
        worst = std::max(worst, diff);
        rel += diff / (b + eps);
        ++rep.n_compared;
    }
    if (rep.n_compared > 0) {
        rep.l2 = 100.0 * std::sqrt(sq / rep.n_compared) / diameter;
        rep.linf = 100.0 * worst / diameter;
        rep.relative_mean = 100.0 * rel / rep.n_compared;
    }
    return rep;
}

namespace detail {

/** Inversions between a sequence and sorted order, by merge count. */
inline long long count_inversions(std::vector<int>& seq, std::vector<int>& scratch, int lo, int hi) {
    if (hi - lo <= 1) return 0;
    const int mid = lo + (hi - lo) / 2;
    long long inv = count_inversions(seq, scratch, lo, mid) + count_inversions(seq, scratch, mid, hi);
    int a = lo, b = mid, out = lo;
    while (a < mid && b < hi) {
        if (seq[static_cast<std::size_t>(a)] <= seq[static_cast<std::size_t>(b)]) {
            scratch[static_cast<std::size_t>(out++)] = seq[static_cast<std::size_t>(a++)];
        } else {
            inv += mid - a;
            scratch[static_cast<std::size_t>(out++)] = seq[static_cast<std::size_t>(b++)];
        }
    }
    while (a < mid) scratch[static_cast<std::size_t>(out++)] = seq[static_cast<std::size_t>(a++)];
    while (b < hi) scratch[static_cast<std::size_t>(out++)] = seq[static_cast<std::size_t>(b++)];
    std::copy(scratch.begin() + lo, scratch.begin() + hi, seq.begin() + lo);
    return inv;
}

}  // namespace detail

/** Fraction of discordant vertex pairs between the orderings the two maps
 *  induce: 0 = identical ranking, 1 = reversed. Ties break on vertex index;
 *  entries non-finite in either map are skipped. O(n log n). */
inline double kendall_tau(const DistanceMap& d, const DistanceMap& ref) {
    if (d.values.size() != ref.values.size())
        throw InvalidArgument("kendall_tau: length mismatch");
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < d.values.size(); ++i)
        if (std::isfinite(d.values[i]) && std::isfinite(ref.values[i]))
            idx.push_back(static_cast<int>(i));
    const long long n = static_cast<long long>(idx.size());
    if (n < 2) return 0.0;

    // rank of each kept vertex in the d-ordering (value, then index)
    std::vector<int> by_d = idx;
    std::sort(by_d.begin(), by_d.end(), [&](int a, int b) {
        return d.values[a] != d.values[b] ? d.values[a] < d.values[b] : a < b;
    });
    std::vector<int> d_rank(static_cast<std::size_t>(d.values.size()), 0);
    for (std::size_t r = 0; r < by_d.size(); ++r) d_rank[static_cast<std::size_t>(by_d[r])] = static_cast<int>(r);

    // walk vertices in ref order and count out-of-order d-ranks
    std::vector<int> by_ref = idx;
    std::sort(by_ref.begin(), by_ref.end(), [&](int a, int b) {
        return ref.values[a] != ref.values[b] ? ref.values[a] < ref.values[b] : a < b;
    });
    std::vector<int> seq(by_ref.size());
    for (std::size_t i = 0; i < by_ref.size(); ++i) seq[i] = d_rank[static_cast<std::size_t>(by_ref[i])];
    std::vector<int> scratch(seq.size());
    long long discordant = detail::count_inversions(seq, scratch, 0, static_cast<int>(seq.size()));
    return static_cast<double>(discordant) / (static_cast<double>(n) * (n - 1) / 2.0);
}

/** Flat JSON object in the report schema. */
inline nlohmann::json report_json(const ErrorReport& rep, const std::string& method, int k, double t,
                                  int n, double runtime_ms) {
    nlohmann::json j;
    j["method"] = method;
    j["k"] = k;
    j["t"] = t;
    j["n"] = n;
    j["relative"] = rep.relative_mean;
    j["l2"] = rep.l2;
    j["linf"] = rep.linf;
    if (rep.kendall_tau) j["tau"] = *rep.kendall_tau;
    else j["tau"] = nullptr;
    j["runtime_ms"] = runtime_ms;
    return j;
}

}  // namespace specdist
