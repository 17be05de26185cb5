#include "fusionrec/metrics.hpp"

#include <algorithm>
#include <unordered_set>

namespace fusionrec {

EvalReport evaluate_rankings(
    const std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>>&
        ranking_and_heldout,
    int k) {
    if (ranking_and_heldout.empty()) throw EmptyInputError("no sessions to evaluate");
    if (k < 1) throw ContractError("K must be >= 1");

    EvalReport report;
    report.k = k;
    report.sessions = ranking_and_heldout.size();

    for (const auto& [ranking, heldout] : ranking_and_heldout) {
        if (heldout.empty()) throw ContractError("session has no held-out items");
        const std::unordered_set<std::uint32_t> relevant(heldout.begin(), heldout.end());

        std::uint64_t hits = 0;
        double ap_sum = 0.0;
        double first_hit_rank = 0.0;
        const std::size_t limit = std::min<std::size_t>(ranking.size(), k);
        for (std::size_t i = 0; i < limit; ++i) {
            if (relevant.count(ranking[i])) {
                ++hits;
                ap_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
                if (first_hit_rank == 0.0) first_hit_rank = static_cast<double>(i + 1);
            }
        }
        const double denom = static_cast<double>(
            std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(k)));
        report.map_at_k += ap_sum / denom;
        report.p_at_k += static_cast<double>(hits) / k;
        report.r_at_k += static_cast<double>(hits) / static_cast<double>(relevant.size());
        report.hr_at_k += hits > 0 ? 1.0 : 0.0;
        report.mrr_at_k += first_hit_rank > 0.0 ? 1.0 / first_hit_rank : 0.0;
    }

    const double n = static_cast<double>(report.sessions);
    report.map_at_k /= n;
    report.p_at_k /= n;
    report.r_at_k /= n;
    report.hr_at_k /= n;
    report.mrr_at_k /= n;
    return report;
}

EvalReport evaluate(const std::vector<EvalSession>& sessions, const RankFn& model, int k) {
    if (sessions.empty()) throw EmptyInputError("no sessions to evaluate");
    std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> pairs;
    pairs.reserve(sessions.size());
    for (const auto& s : sessions) pairs.emplace_back(model(s.history, k), s.heldout);
    return evaluate_rankings(pairs, k);
}

}  // namespace fusionrec
