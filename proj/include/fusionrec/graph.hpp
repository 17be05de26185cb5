#pragma once

// Interaction-graph ingestion: hyperedge parsing, clique/star expansion and
// construction of the row-stochastic transition matrix kept in COO triplets.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusionrec/common.hpp"

namespace fusionrec {

using NodeLabel = std::string;

// Label must be non-empty and free of tab/newline (reserved separators).
bool valid_node_label(const NodeLabel& label);

struct Hyperedge {
    std::vector<NodeLabel> nodes;  // distinct labels, first-appearance order, size >= 2
    double weight = 1.0;           // > 0
};

// Dense ids 0..N-1 in first-appearance order. Virtual hub nodes created by
// star expansion are flagged so embedding export can drop them.
class NodeIndex {
public:
    std::uint32_t add(const NodeLabel& label, bool is_virtual = false);
    std::uint32_t id_of(const NodeLabel& label) const;  // throws ContractError if absent
    bool contains(const NodeLabel& label) const;
    const NodeLabel& label_of(std::uint32_t id) const { return labels_.at(id); }
    bool is_virtual(std::uint32_t id) const { return virtual_.at(id) != 0; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(labels_.size()); }
    const std::vector<NodeLabel>& labels() const { return labels_; }

private:
    std::unordered_map<NodeLabel, std::uint32_t> ids_;
    std::vector<NodeLabel> labels_;
    std::vector<std::uint8_t> virtual_;
};

struct Triplet {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    double weight = 0.0;
};

// Row-stochastic sparse matrix in COO layout. Triplets are sorted by
// (row, col), unique, strictly positive, and every nonempty row sums to 1.
// Immutable once built; safe to share across reader threads.
struct TransitionMatrix {
    std::uint32_t n_rows = 0;
    std::uint32_t n_cols = 0;
    std::vector<Triplet> triplets;
    std::vector<double> row_sums;  // post-normalization: 1.0, or 0.0 for empty rows
};

struct ParseOptions {
    char delimiter = '\t';
    bool weight_column = false;  // last field is a positive numeric weight
};

struct ParseResult {
    std::vector<Hyperedge> edges;
    NodeIndex index;
    std::uint64_t malformed_lines = 0;
};

// One hyperedge per line, >= 2 node fields after in-edge deduplication.
// Malformed lines are counted and skipped; blank lines are ignored.
// Throws IoError on stream failure and EmptyInputError when nothing parses.
ParseResult parse_interactions(std::istream& in, const ParseOptions& options = {});

// All k*(k-1)/2 unordered pairs of the edge, each carrying the edge weight.
std::vector<std::tuple<NodeLabel, NodeLabel, double>> clique_expand(const Hyperedge& edge);

// Replaces hyperedge i with pair edges (member, "__star::i"); the virtual hub
// labels are appended to the index with the virtual flag set.
std::vector<Hyperedge> star_expand(const std::vector<Hyperedge>& edges, NodeIndex& index);

enum class ExpansionMode { clique, star };

// Builds the square transition matrix over the full index. Both directions of
// every expanded pair are inserted, duplicate (row, col) entries aggregate by
// weight summation, and each nonempty row is normalized to sum 1. Star mode
// extends the index with the virtual hub nodes.
TransitionMatrix build_transition(const std::vector<Hyperedge>& edges, NodeIndex& index,
                                  ExpansionMode mode);

// Persisted graph: magic "FRG1", node/triplet counts, label table with
// per-node flags, then the triplet array. Little-endian throughout.
void save_graph(const TransitionMatrix& m, const NodeIndex& index, std::ostream& out);
std::pair<TransitionMatrix, NodeIndex> load_graph(std::istream& in);

}  // namespace fusionrec
