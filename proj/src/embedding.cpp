#include "fusionrec/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fusionrec/binio.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

std::uint64_t EmbeddingMatrix::row_of(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) throw ContractError("unknown embedding label: " + label);
    return it->second;
}

void EmbeddingMatrix::rebuild_label_map() {
    by_label_.clear();
    by_label_.reserve(labels.size());
    for (std::uint64_t i = 0; i < labels.size(); ++i) by_label_.emplace(labels[i], i);
}

EmbeddingMatrix init_matrix(const NodeIndex& index, const EmbedConfig& config) {
    if (index.size() == 0) throw EmptyInputError("cannot initialize embeddings for empty index");
    if (config.dim < 1) throw ContractError("embedding dim must be >= 1");

    EmbeddingMatrix q;
    q.n_rows = index.size();
    q.dim = config.dim;
    q.data.resize(q.n_rows * q.dim);
    q.labels = index.labels();
    q.virtual_flags.resize(q.n_rows);
    for (std::uint32_t i = 0; i < index.size(); ++i)
        q.virtual_flags[i] = index.is_virtual(i) ? 1 : 0;

    for (std::uint64_t i = 0; i < q.n_rows; ++i) {
        double* row = q.row(i);
        for (std::uint64_t j = 0; j < q.dim; ++j)
            row[j] = hash_init_value(q.labels[i], j, config.seed);
    }
    q.rebuild_label_map();
    return q;
}

EmbeddingMatrix propagate(const TransitionMatrix& m, const EmbeddingMatrix& q, int iterations,
                          int workers) {
    if (m.n_cols != q.n_rows || m.n_rows != q.n_rows)
        throw ContractError("transition matrix and embedding matrix shapes do not match");
    if (iterations < 1) throw ContractError("iterations must be >= 1");

    const std::uint64_t n = q.n_rows;
    const std::uint64_t d = q.dim;

    EmbeddingMatrix out = q;
    std::vector<double> next(n * d);
    std::vector<double>& cur = out.data;

    for (int it = 0; it < iterations; ++it) {
        // M*Q, parallel over dimension slices. Each output element accumulates
        // contributions in triplet order, so results do not depend on workers.
        parallel_chunks(d, workers, [&](std::size_t j0, std::size_t j1) {
            const std::size_t w = j1 - j0;
            for (std::uint64_t r = 0; r < n; ++r)
                std::fill_n(next.data() + r * d + j0, w, 0.0);
            for (const Triplet& t : m.triplets) {
                const double* src = cur.data() + static_cast<std::uint64_t>(t.col) * d + j0;
                double* dst = next.data() + static_cast<std::uint64_t>(t.row) * d + j0;
                const double tw = t.weight;
                for (std::size_t j = 0; j < w; ++j) dst[j] += tw * src[j];
            }
            // Empty rows keep their vector through the step.
            for (std::uint64_t r = 0; r < n; ++r)
                if (m.row_sums[r] == 0.0)
                    std::copy_n(cur.data() + r * d + j0, w, next.data() + r * d + j0);
        });

        // Row norms summed in fixed dimension order.
        parallel_chunks(n, workers, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t r = r0; r < r1; ++r) {
                double* row = next.data() + r * d;
                double s = 0.0;
                for (std::uint64_t j = 0; j < d; ++j) s += row[j] * row[j];
                if (s > 0.0) {
                    const double inv = 1.0 / std::sqrt(s);
                    for (std::uint64_t j = 0; j < d; ++j) row[j] *= inv;
                }
            }
        });

        std::swap(cur, next);
    }
    return out;
}

InductiveLinks make_inductive_links(
    const std::vector<std::tuple<std::string, std::string, double>>& links,
    const EmbeddingMatrix& q) {
    InductiveLinks out;
    std::unordered_map<std::string, std::uint32_t> row_ids;
    // Aggregate duplicate (new, base) pairs, then row-normalize.
    std::vector<std::unordered_map<std::uint32_t, double>> rows;
    for (const auto& [new_label, base_label, weight] : links) {
        if (weight <= 0.0) throw ContractError("inductive link weight must be positive");
        std::uint64_t base;
        try {
            base = q.row_of(base_label);
        } catch (const ContractError&) {
            throw ContractError("inductive link references unknown base node: " + base_label);
        }
        auto [it, inserted] = row_ids.emplace(new_label, static_cast<std::uint32_t>(out.rows.size()));
        if (inserted) {
            out.rows.push_back(new_label);
            rows.emplace_back();
        }
        rows[it->second][static_cast<std::uint32_t>(base)] += weight;
    }
    for (std::uint32_t r = 0; r < rows.size(); ++r) {
        double sum = 0.0;
        for (const auto& [col, w] : rows[r]) sum += w;
        std::vector<std::pair<std::uint32_t, double>> sorted(rows[r].begin(), rows[r].end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [col, w] : sorted) out.triplets.push_back({r, col, w / sum});
    }
    return out;
}

EmbeddingMatrix embed_inductive(const InductiveLinks& links, const EmbeddingMatrix& q) {
    for (const auto& t : links.triplets)
        if (t.col >= q.n_rows) throw ContractError("inductive link column out of range");

    EmbeddingMatrix out;
    out.n_rows = links.rows.size();
    out.dim = q.dim;
    out.data.assign(out.n_rows * out.dim, 0.0);
    out.labels = links.rows;
    out.virtual_flags.assign(out.n_rows, 0);

    for (const auto& t : links.triplets) {
        const double* src = q.row(t.col);
        double* dst = out.row(t.row);
        for (std::uint64_t j = 0; j < q.dim; ++j) dst[j] += t.weight * src[j];
    }
    for (std::uint64_t r = 0; r < out.n_rows; ++r) {
        double* row = out.row(r);
        double s = 0.0;
        for (std::uint64_t j = 0; j < out.dim; ++j) s += row[j] * row[j];
        if (s > 0.0) {
            const double inv = 1.0 / std::sqrt(s);
            for (std::uint64_t j = 0; j < out.dim; ++j) row[j] *= inv;
        }
    }
    out.rebuild_label_map();
    return out;
}

namespace {

bool row_exported(const EmbeddingMatrix& q, std::uint64_t r) {
    return q.virtual_flags.empty() || q.virtual_flags[r] == 0;
}

std::uint64_t exported_rows(const EmbeddingMatrix& q) {
    std::uint64_t n = 0;
    for (std::uint64_t r = 0; r < q.n_rows; ++r)
        if (row_exported(q, r)) ++n;
    return n;
}

}  // namespace

void export_embeddings_text(const EmbeddingMatrix& q, std::ostream& out) {
    out << exported_rows(q) << ' ' << q.dim << '\n';
    char buf[64];
    for (std::uint64_t r = 0; r < q.n_rows; ++r) {
        if (!row_exported(q, r)) continue;
        out << q.labels[r];
        const double* row = q.row(r);
        for (std::uint64_t j = 0; j < q.dim; ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", row[j]);
            out << '\t' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing embeddings");
}

EmbeddingMatrix import_embeddings_text(std::istream& in) {
    EmbeddingMatrix q;
    std::string header;
    if (!std::getline(in, header)) throw IoError("missing embedding header");
    {
        std::istringstream hs(header);
        if (!(hs >> q.n_rows >> q.dim) || q.dim < 1) throw IoError("bad embedding header");
    }
    q.data.reserve(q.n_rows * q.dim);
    q.labels.reserve(q.n_rows);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string label;
        if (!std::getline(ls, label, '\t')) throw IoError("bad embedding row");
        q.labels.push_back(label);
        for (std::uint64_t j = 0; j < q.dim; ++j) {
            std::string field;
            if (!std::getline(ls, field, '\t')) throw IoError("embedding row too short");
            q.data.push_back(std::stod(field));
        }
    }
    if (q.labels.size() != q.n_rows) throw IoError("embedding row count does not match header");
    q.virtual_flags.assign(q.n_rows, 0);
    q.rebuild_label_map();
    return q;
}

void export_embeddings_binary(const EmbeddingMatrix& q, std::ostream& out) {
    binio::write_magic(out, "FRE1");
    binio::write_u64(out, exported_rows(q));
    binio::write_u64(out, q.dim);
    for (std::uint64_t r = 0; r < q.n_rows; ++r)
        if (row_exported(q, r)) binio::write_string(out, q.labels[r]);
    for (std::uint64_t r = 0; r < q.n_rows; ++r) {
        if (!row_exported(q, r)) continue;
        const double* row = q.row(r);
        for (std::uint64_t j = 0; j < q.dim; ++j) binio::write_f64(out, row[j]);
    }
    out.flush();
    if (!out) throw IoError("failed writing embeddings");
}

EmbeddingMatrix import_embeddings_binary(std::istream& in) {
    binio::expect_magic(in, "FRE1");
    EmbeddingMatrix q;
    q.n_rows = binio::read_u64(in);
    q.dim = binio::read_u64(in);
    q.labels.reserve(q.n_rows);
    for (std::uint64_t r = 0; r < q.n_rows; ++r) q.labels.push_back(binio::read_string(in));
    q.data.resize(q.n_rows * q.dim);
    for (auto& v : q.data) v = binio::read_f64(in);
    q.virtual_flags.assign(q.n_rows, 0);
    q.rebuild_label_map();
    return q;
}

}  // namespace fusionrec
