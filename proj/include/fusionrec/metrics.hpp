#pragma once

// Session-based ranking metrics truncated at K: MAP, precision, recall, hit
// rate and MRR, averaged over sessions.

#include <cstdint>
#include <functional>
#include <vector>

#include "fusionrec/common.hpp"

namespace fusionrec {

struct EvalReport {
    double map_at_k = 0.0;
    double p_at_k = 0.0;
    double r_at_k = 0.0;
    double hr_at_k = 0.0;
    double mrr_at_k = 0.0;
    std::uint64_t sessions = 0;
    int k = 0;
};

struct EvalSession {
    std::vector<std::uint32_t> history;
    std::vector<std::uint32_t> heldout;  // >= 1 relevant item
};

// Per session over its top-K ranking: P@K = hits/K, R@K = hits/|heldout|,
// HR@K = [hits >= 1], MRR@K = 1/rank of the first hit (0 if none), and
// AP@K = sum of precision at each hit position / min(K, |heldout|).
// The report averages each metric over sessions.
EvalReport evaluate_rankings(
    const std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>>&
        ranking_and_heldout,
    int k);

using RankFn =
    std::function<std::vector<std::uint32_t>(const std::vector<std::uint32_t>& history, int k)>;

EvalReport evaluate(const std::vector<EvalSession>& sessions, const RankFn& model, int k = 20);

}  // namespace fusionrec
