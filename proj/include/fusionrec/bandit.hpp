#pragma once

// Thompson-sampling variant selection over Beta posteriors with binary
// rewards. Sampling draws from a seeded counter stream, so a state replays
// identically from (seed, counter).

#include <cstdint>
#include <vector>

#include "fusionrec/common.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

class BanditState {
public:
    BanditState(std::size_t n_variants, std::uint64_t seed, std::uint64_t counter = 0);

    // Samples theta_v ~ Beta(alpha_v, beta_v) for every variant and returns
    // the argmax (ties go to the lowest variant id). Advances the rng counter.
    std::size_t select_variant();

    // reward 1 bumps alpha, reward 0 bumps beta.
    void record_feedback(std::size_t variant, int reward);

    std::size_t n_variants() const { return arms_.size(); }
    double alpha(std::size_t v) const { return arms_.at(v).first; }
    double beta(std::size_t v) const { return arms_.at(v).second; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return rng_.counter(); }

private:
    std::vector<std::pair<double, double>> arms_;  // (alpha, beta), init (1, 1)
    std::uint64_t seed_;
    CounterRng rng_;
};

}  // namespace fusionrec
