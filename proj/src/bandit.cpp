#include "fusionrec/bandit.hpp"

namespace fusionrec {

BanditState::BanditState(std::size_t n_variants, std::uint64_t seed, std::uint64_t counter)
    : arms_(n_variants, {1.0, 1.0}), seed_(seed), rng_(seed, counter) {
    if (n_variants == 0) throw EmptyInputError("bandit needs at least one variant");
}

std::size_t BanditState::select_variant() {
    std::size_t best = 0;
    double best_theta = -1.0;
    for (std::size_t v = 0; v < arms_.size(); ++v) {
        const double theta = rng_.next_beta(arms_[v].first, arms_[v].second);
        if (theta > best_theta) {
            best_theta = theta;
            best = v;
        }
    }
    return best;
}

void BanditState::record_feedback(std::size_t variant, int reward) {
    if (variant >= arms_.size())
        throw ContractError("unknown bandit variant " + std::to_string(variant));
    if (reward != 0 && reward != 1) throw ContractError("reward must be 0 or 1");
    if (reward == 1)
        arms_[variant].first += 1.0;
    else
        arms_[variant].second += 1.0;
}

}  // namespace fusionrec
