#pragma once

// Deterministic node embeddings: hash-based init, iterative transition-matrix
// propagation with per-step L2 normalization, and inductive embedding of new
// nodes from their links into the base graph.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusionrec/graph.hpp"

namespace fusionrec {

struct EmbedConfig {
    std::uint32_t dim = 1024;
    int iterations = 4;  // valid 1..16
    std::uint64_t seed = 0;
};

// Dense row-major matrix keyed by node label. Virtual star-hub rows carry a
// flag so exports can drop them.
struct EmbeddingMatrix {
    std::uint64_t n_rows = 0;
    std::uint64_t dim = 0;
    std::vector<double> data;  // n_rows * dim, row-major
    std::vector<std::string> labels;
    std::vector<std::uint8_t> virtual_flags;

    double* row(std::uint64_t r) { return data.data() + r * dim; }
    const double* row(std::uint64_t r) const { return data.data() + r * dim; }

    // Label -> row id, or throws ContractError.
    std::uint64_t row_of(const std::string& label) const;
    void rebuild_label_map();

private:
    std::unordered_map<std::string, std::uint64_t> by_label_;
};

// Q[i][j] = hash_init_value(label(i), j, seed). Rows are not normalized here;
// normalization happens inside propagation steps.
EmbeddingMatrix init_matrix(const NodeIndex& index, const EmbedConfig& config);

// Repeats { Q <- M*Q; L2-normalize each nonzero row } exactly `iterations`
// times. Empty transition rows act as identity (the row is carried over, then
// normalized). Work is split across embedding dimensions; output is
// bit-identical for any worker count.
EmbeddingMatrix propagate(const TransitionMatrix& m, const EmbeddingMatrix& q, int iterations,
                          int workers = 1);

// Links from new nodes into the base matrix, row-normalized to sum 1.
struct InductiveLinks {
    std::vector<std::string> rows;  // new-node labels
    std::vector<Triplet> triplets;  // row = position in rows, col = base row id
};

// Resolves (new label, base label, weight) tuples against q and normalizes
// each new node's link row to sum 1. Unknown base labels are rejected with the
// offending label in the message.
InductiveLinks make_inductive_links(
    const std::vector<std::tuple<std::string, std::string, double>>& links,
    const EmbeddingMatrix& q);

// L2-normalized M'*Q rows for the new nodes; q is untouched.
EmbeddingMatrix embed_inductive(const InductiveLinks& links, const EmbeddingMatrix& q);

// Text format: header "N d", then one line per non-virtual node with the
// label and d values at 9 significant digits, tab-separated.
void export_embeddings_text(const EmbeddingMatrix& q, std::ostream& out);
EmbeddingMatrix import_embeddings_text(std::istream& in);

// Binary format (magic "FRE1") round-trips bit-exactly; virtual rows are
// dropped on export, matching the text form.
void export_embeddings_binary(const EmbeddingMatrix& q, std::ostream& out);
EmbeddingMatrix import_embeddings_binary(std::istream& in);

}  // namespace fusionrec
