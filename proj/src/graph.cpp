#include "fusionrec/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>
#include <unordered_set>

#include "fusionrec/binio.hpp"

namespace fusionrec {

bool valid_node_label(const NodeLabel& label) {
    if (label.empty()) return false;
    return label.find('\t') == std::string::npos && label.find('\n') == std::string::npos;
}

std::uint32_t NodeIndex::add(const NodeLabel& label, bool is_virtual) {
    auto it = ids_.find(label);
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(labels_.size());
    ids_.emplace(label, id);
    labels_.push_back(label);
    virtual_.push_back(is_virtual ? 1 : 0);
    return id;
}

std::uint32_t NodeIndex::id_of(const NodeLabel& label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) throw ContractError("unknown node label: " + label);
    return it->second;
}

bool NodeIndex::contains(const NodeLabel& label) const { return ids_.count(label) != 0; }

namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse_positive_weight(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && out > 0.0 && std::isfinite(out);
}

}  // namespace

ParseResult parse_interactions(std::istream& in, const ParseOptions& options) {
    ParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields = split_fields(line, options.delimiter);
        double weight = 1.0;
        if (options.weight_column) {
            if (fields.size() < 3 || !parse_positive_weight(fields.back(), weight)) {
                ++result.malformed_lines;
                continue;
            }
            fields.pop_back();
        }

        Hyperedge edge;
        edge.weight = weight;
        bool bad = false;
        std::unordered_set<std::string> seen;
        for (auto& f : fields) {
            if (!valid_node_label(f)) {
                bad = true;
                break;
            }
            if (seen.insert(f).second) edge.nodes.push_back(std::move(f));
        }
        if (bad || edge.nodes.size() < 2) {
            ++result.malformed_lines;
            continue;
        }
        for (const auto& label : edge.nodes) result.index.add(label);
        result.edges.push_back(std::move(edge));
    }
    if (in.bad()) throw IoError("failed reading interaction stream");
    if (result.edges.empty()) throw EmptyInputError("no valid hyperedges in input");
    return result;
}

std::vector<std::tuple<NodeLabel, NodeLabel, double>> clique_expand(const Hyperedge& edge) {
    std::vector<std::tuple<NodeLabel, NodeLabel, double>> pairs;
    const std::size_t k = edge.nodes.size();
    pairs.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            pairs.emplace_back(edge.nodes[i], edge.nodes[j], edge.weight);
    return pairs;
}

std::vector<Hyperedge> star_expand(const std::vector<Hyperedge>& edges, NodeIndex& index) {
    std::vector<Hyperedge> expanded;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const NodeLabel hub = "__star::" + std::to_string(i);
        index.add(hub, /*is_virtual=*/true);
        for (const auto& node : edges[i].nodes) {
            Hyperedge pair;
            pair.nodes = {node, hub};
            pair.weight = edges[i].weight;
            expanded.push_back(std::move(pair));
        }
    }
    return expanded;
}

namespace {

void insert_both_directions(std::vector<Triplet>& triplets, std::uint32_t a, std::uint32_t b,
                            double w) {
    triplets.push_back({a, b, w});
    triplets.push_back({b, a, w});
}

}  // namespace

TransitionMatrix build_transition(const std::vector<Hyperedge>& edges, NodeIndex& index,
                                  ExpansionMode mode) {
    if (edges.empty()) throw EmptyInputError("cannot build transition matrix from zero edges");

    std::vector<Triplet> triplets;
    if (mode == ExpansionMode::clique) {
        for (const auto& edge : edges)
            for (const auto& [a, b, w] : clique_expand(edge))
                insert_both_directions(triplets, index.id_of(a), index.id_of(b), w);
    } else {
        const std::vector<Hyperedge> pairs = star_expand(edges, index);
        for (const auto& pair : pairs)
            insert_both_directions(triplets, index.id_of(pair.nodes[0]),
                                   index.id_of(pair.nodes[1]), pair.weight);
    }

    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });

    TransitionMatrix m;
    m.n_rows = m.n_cols = index.size();
    m.triplets.reserve(triplets.size());
    for (const auto& t : triplets) {
        if (!m.triplets.empty() && m.triplets.back().row == t.row &&
            m.triplets.back().col == t.col) {
            m.triplets.back().weight += t.weight;
        } else {
            m.triplets.push_back(t);
        }
    }

    std::vector<double> sums(m.n_rows, 0.0);
    for (const auto& t : m.triplets) sums[t.row] += t.weight;
    for (auto& t : m.triplets) t.weight /= sums[t.row];

    m.row_sums.assign(m.n_rows, 0.0);
    for (const auto& t : m.triplets) m.row_sums[t.row] += t.weight;
    return m;
}

void save_graph(const TransitionMatrix& m, const NodeIndex& index, std::ostream& out) {
    binio::write_magic(out, "FRG1");
    binio::write_u64(out, index.size());
    binio::write_u64(out, m.triplets.size());
    for (std::uint32_t i = 0; i < index.size(); ++i) {
        binio::write_string(out, index.label_of(i));
        binio::write_u8(out, index.is_virtual(i) ? 1 : 0);
    }
    for (const auto& t : m.triplets) {
        binio::write_u32(out, t.row);
        binio::write_u32(out, t.col);
        binio::write_f64(out, t.weight);
    }
    out.flush();
    if (!out) throw IoError("failed writing graph");
}

std::pair<TransitionMatrix, NodeIndex> load_graph(std::istream& in) {
    binio::expect_magic(in, "FRG1");
    const std::uint64_t n_nodes = binio::read_u64(in);
    const std::uint64_t n_triplets = binio::read_u64(in);
    NodeIndex index;
    for (std::uint64_t i = 0; i < n_nodes; ++i) {
        const std::string label = binio::read_string(in);
        const bool is_virtual = binio::read_u8(in) != 0;
        index.add(label, is_virtual);
    }
    TransitionMatrix m;
    m.n_rows = m.n_cols = static_cast<std::uint32_t>(n_nodes);
    m.triplets.resize(n_triplets);
    for (auto& t : m.triplets) {
        t.row = binio::read_u32(in);
        t.col = binio::read_u32(in);
        t.weight = binio::read_f64(in);
        if (t.row >= n_nodes || t.col >= n_nodes) throw IoError("triplet id out of range");
    }
    m.row_sums.assign(m.n_rows, 0.0);
    for (const auto& t : m.triplets) m.row_sums[t.row] += t.weight;
    return {std::move(m), std::move(index)};
}

}  // namespace fusionrec
