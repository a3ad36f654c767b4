#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mdlregion/codelength.hpp"

namespace mdlregion {

namespace detail {

inline double lfact_nat(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline std::vector<std::int64_t> dense_class_counts(std::span<const std::int64_t> labels,
                                                    std::vector<std::int32_t>& dense) {
    std::unordered_map<std::int64_t, std::int32_t> remap;
    std::vector<std::int64_t> counts;
    dense.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = remap.try_emplace(labels[i], static_cast<std::int32_t>(counts.size()));
        if (fresh) counts.push_back(0);
        dense[i] = it->second;
        ++counts[it->second];
    }
    return counts;
}

/// Entropy in nats, written as sum of (c/n)*ln(n/c) so that the mutual
/// information loop below reproduces the exact same terms for identical
/// partitions (making AMI exactly 1.0 there).
inline double class_entropy_nats(std::span<const std::int64_t> counts, std::int64_t n) {
    double h = 0.0;
    for (std::int64_t c : counts)
        if (c > 0)
            h += (static_cast<double>(c) / static_cast<double>(n)) *
                 std::log(static_cast<double>(n) / static_cast<double>(c));
    return h;
}

}  // namespace detail

/// Adjusted mutual information between two labelings of the same items:
/// (MI - E[MI]) / (max(H(a), H(b)) - E[MI]), with E[MI] under the
/// fixed-marginals permutation model (hypergeometric expectation) and
/// natural-log internals. Either labeling having a single class returns 0.
inline double adjusted_mutual_information(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b) {
    const std::size_t n_items = a.size();
    if (n_items == 0 || b.size() != n_items)
        throw std::runtime_error("adjusted_mutual_information: label vectors differ in length");
    const auto n = static_cast<std::int64_t>(n_items);

    std::vector<std::int32_t> da, db;
    const std::vector<std::int64_t> ca = detail::dense_class_counts(a, da);
    const std::vector<std::int64_t> cb = detail::dense_class_counts(b, db);
    const std::size_t r = ca.size(), c = cb.size();
    if (r <= 1 || c <= 1) return 0.0;

    std::vector<std::int64_t> joint(r * c, 0);
    for (std::size_t i = 0; i < n_items; ++i) ++joint[static_cast<std::size_t>(da[i]) * c + db[i]];

    const double ha = detail::class_entropy_nats(ca, n);
    const double hb = detail::class_entropy_nats(cb, n);

    double mi = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const std::int64_t nij = joint[i * c + j];
            if (nij == 0) continue;
            mi += (static_cast<double>(nij) / static_cast<double>(n)) *
                  std::log(static_cast<double>(n * nij) /
                           (static_cast<double>(ca[i]) * static_cast<double>(cb[j])));
        }

    const double lfn = detail::lfact_nat(n);
    double emi = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const std::int64_t ai = ca[i], bj = cb[j];
            const std::int64_t lo = std::max<std::int64_t>(1, ai + bj - n);
            const std::int64_t hi = std::min(ai, bj);
            const double l_const = detail::lfact_nat(ai) + detail::lfact_nat(bj) +
                                   detail::lfact_nat(n - ai) + detail::lfact_nat(n - bj) - lfn;
            for (std::int64_t nij = lo; nij <= hi; ++nij) {
                const double l_pmf = l_const - detail::lfact_nat(nij) -
                                     detail::lfact_nat(ai - nij) - detail::lfact_nat(bj - nij) -
                                     detail::lfact_nat(n - ai - bj + nij);
                emi += (static_cast<double>(nij) / static_cast<double>(n)) *
                       std::log(static_cast<double>(n) * static_cast<double>(nij) /
                                (static_cast<double>(ai) * static_cast<double>(bj))) *
                       std::exp(l_pmf);
            }
        }

    const double denom = std::max(ha, hb) - emi;
    if (std::abs(denom) < 1e-15) return 0.0;
    return (mi - emi) / denom;
}

inline double adjusted_mutual_information(std::span<const std::uint32_t> a,
                                          std::span<const std::uint32_t> b) {
    std::vector<std::int64_t> wa(a.begin(), a.end()), wb(b.begin(), b.end());
    return adjusted_mutual_information(std::span<const std::int64_t>(wa),
                                       std::span<const std::int64_t>(wb));
}

/// Quality measure: selected codelength over the singleton baseline
/// codelength on the same data. Smaller is better; the greedy
/// selection can never exceed 1 because the trajectory contains the baseline.
inline double inverse_compression_ratio(const CodelengthBreakdown& selected,
                                        const CodelengthBreakdown& baseline) {
    if (baseline.total_bits == 0.0)
        throw std::runtime_error("inverse_compression_ratio: baseline codelength is zero");
    return selected.total_bits / baseline.total_bits;
}

}  // namespace mdlregion
