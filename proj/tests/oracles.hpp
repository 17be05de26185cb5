#pragma once

// Independent reference implementations used only by tests. Everything here
// is written as straight dense/naive code, deliberately sharing no machinery
// with the library paths it checks.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fusionrec/graph.hpp"

namespace oracles {

// Dense row-stochastic matrix from explicit clique expansion.
inline std::vector<std::vector<double>> dense_transition_clique(
    const std::vector<fusionrec::Hyperedge>& edges, const fusionrec::NodeIndex& index) {
    const std::size_t n = index.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (const auto& edge : edges) {
        for (std::size_t i = 0; i < edge.nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < edge.nodes.size(); ++j) {
                const std::size_t a = index.id_of(edge.nodes[i]);
                const std::size_t b = index.id_of(edge.nodes[j]);
                m[a][b] += edge.weight;
                m[b][a] += edge.weight;
            }
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (double v : m[r]) sum += v;
        if (sum > 0.0)
            for (double& v : m[r]) v /= sum;
    }
    return m;
}

// Dense propagation: explicit matmul plus L2 row normalization, with empty
// rows carried through unchanged before normalization.
inline std::vector<std::vector<double>> dense_propagate(
    const std::vector<std::vector<double>>& m, std::vector<std::vector<double>> q,
    int iterations) {
    const std::size_t n = q.size();
    const std::size_t d = q.empty() ? 0 : q[0].size();
    for (int it = 0; it < iterations; ++it) {
        std::vector<std::vector<double>> next(n, std::vector<double>(d, 0.0));
        for (std::size_t r = 0; r < n; ++r) {
            double row_total = 0.0;
            for (std::size_t c = 0; c < n; ++c) row_total += m[r][c];
            if (row_total == 0.0) {
                next[r] = q[r];
            } else {
                for (std::size_t c = 0; c < n; ++c) {
                    if (m[r][c] == 0.0) continue;
                    for (std::size_t j = 0; j < d; ++j) next[r][j] += m[r][c] * q[c][j];
                }
            }
            double norm = 0.0;
            for (double v : next[r]) norm += v * v;
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                for (double& v : next[r]) v /= norm;
            }
        }
        q = std::move(next);
    }
    return q;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double denom = std::sqrt(na) * std::sqrt(nb);
    return denom > 0.0 ? dot / denom : 0.0;
}

// Session-metric reference: one pass per metric, written independently of
// fusionrec::evaluate_rankings.
struct MetricOracleResult {
    double map = 0, p = 0, r = 0, hr = 0, mrr = 0;
};

inline MetricOracleResult metric_oracle(
    const std::vector<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>>& runs,
    int k) {
    MetricOracleResult out;
    for (const auto& [ranking, heldout] : runs) {
        std::set<std::uint32_t> rel(heldout.begin(), heldout.end());
        std::vector<std::uint32_t> top(
            ranking.begin(),
            ranking.begin() + std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(k)));

        int hits = 0;
        for (auto item : top)
            if (rel.count(item)) ++hits;
        out.p += double(hits) / k;
        out.r += double(hits) / double(rel.size());
        out.hr += hits > 0 ? 1.0 : 0.0;

        double mrr = 0.0;
        for (std::size_t i = 0; i < top.size(); ++i)
            if (rel.count(top[i])) {
                mrr = 1.0 / double(i + 1);
                break;
            }
        out.mrr += mrr;

        double ap = 0.0;
        int running = 0;
        for (std::size_t i = 0; i < top.size(); ++i) {
            if (rel.count(top[i])) {
                ++running;
                ap += double(running) / double(i + 1);
            }
        }
        ap /= double(std::min<std::size_t>(rel.size(), static_cast<std::size_t>(k)));
        out.map += ap;
    }
    const double n = double(runs.size());
    out.map /= n;
    out.p /= n;
    out.r /= n;
    out.hr /= n;
    out.mrr /= n;
    return out;
}

}  // namespace oracles
