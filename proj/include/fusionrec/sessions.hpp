#pragma once

// Session log loading and the session -> training example split.

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "fusionrec/scorer.hpp"
#include "fusionrec/sketch.hpp"

namespace fusionrec {

struct Session {
    std::string id;
    std::vector<std::string> items;  // timestamp order, file order breaking ties
};

struct SessionLog {
    std::vector<Session> sessions;  // first-appearance order
    std::uint64_t malformed_lines = 0;
};

// Tab-separated `session_id  item_id  timestamp`; malformed lines are counted
// and skipped.
SessionLog load_sessions(std::istream& in);

// Flattened row-normalized sketch of a set of item codes; the model input for
// a user whose history is `codes`.
std::vector<double> history_input(const std::vector<CodeSet>& codes, const SketchLayout& layout);

// Splits each session with >= 2 resolvable items into history (first half,
// rounded up) and targets (the rest); input is the history sketch, target the
// normalized sketch of the remaining items. Items missing from `labels` are
// dropped. Sessions that end up with an empty side are skipped.
std::vector<TrainingExample> examples_from_sessions(const SessionLog& log,
                                                    const ItemCodes& item_codes);

}  // namespace fusionrec
