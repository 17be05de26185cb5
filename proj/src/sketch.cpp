#include "fusionrec/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "fusionrec/binio.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

SketchLayout make_layout(std::uint32_t depth, std::uint32_t bits, std::uint32_t input_dim,
                         std::uint64_t seed) {
    if (depth < 1 || bits < 1 || input_dim < 1)
        throw ContractError("sketch layout parameters must be positive");
    if (bits >= 31) throw ContractError("sketch layout bits too large");

    SketchLayout layout;
    layout.depth = depth;
    layout.bits = bits;
    layout.width = 1u << bits;
    layout.input_dim = input_dim;
    layout.seed = seed;
    layout.hyperplanes.resize(std::size_t(depth) * bits * input_dim);
    std::size_t k = 0;
    for (std::uint32_t p = 0; p < depth; ++p)
        for (std::uint32_t i = 0; i < bits; ++i)
            for (std::uint32_t c = 0; c < input_dim; ++c)
                layout.hyperplanes[k++] = gaussian_at(seed, p, i, c);
    return layout;
}

CodeSet encode(std::span<const double> v, const SketchLayout& layout) {
    if (v.size() != layout.input_dim)
        throw ContractError("vector dimension does not match sketch layout");
    CodeSet codes(layout.depth);
    for (std::uint32_t p = 0; p < layout.depth; ++p) {
        std::uint32_t bucket = 0;
        for (std::uint32_t i = 0; i < layout.bits; ++i) {
            const double* h = layout.plane(p, i);
            double dot = 0.0;
            for (std::uint32_t c = 0; c < layout.input_dim; ++c) dot += v[c] * h[c];
            bucket |= (dot >= 0.0 ? 1u : 0u) << (layout.bits - 1 - i);
        }
        codes[p] = bucket;
    }
    return codes;
}

Sketch zero_sketch(const SketchLayout& layout) {
    Sketch s;
    s.depth = layout.depth;
    s.width = layout.width;
    s.kind = SketchKind::counts;
    s.cells.assign(std::size_t(layout.depth) * layout.width, 0.0);
    return s;
}

namespace {

void check_codes(const CodeSet& codes, std::uint32_t depth, std::uint32_t width) {
    if (codes.size() != depth) throw ContractError("code set depth does not match layout");
    for (auto c : codes)
        if (c >= width) throw ContractError("bucket index out of range");
}

}  // namespace

Sketch sketch_of_items(const std::vector<CodeSet>& codes, const std::vector<double>& weights,
                       const SketchLayout& layout) {
    if (codes.size() != weights.size())
        throw ContractError("codes and weights sizes do not match");
    Sketch s = zero_sketch(layout);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (weights[i] <= 0.0) throw ContractError("item weight must be positive");
        check_codes(codes[i], s.depth, s.width);
        for (std::uint32_t p = 0; p < s.depth; ++p) s.at(p, codes[i][p]) += weights[i];
    }
    return s;
}

Sketch sketch_add(const Sketch& a, const Sketch& b) {
    if (a.depth != b.depth || a.width != b.width)
        throw ContractError("sketch layouts do not match");
    if (a.kind != SketchKind::counts || b.kind != SketchKind::counts)
        throw ContractError("sketch_add requires count sketches");
    Sketch out = a;
    for (std::size_t i = 0; i < out.cells.size(); ++i) out.cells[i] += b.cells[i];
    return out;
}

double readout(const Sketch& s, const CodeSet& codes, ReadoutMode mode) {
    check_codes(codes, s.depth, s.width);
    if (mode == ReadoutMode::min) {
        double m = std::numeric_limits<double>::infinity();
        for (std::uint32_t p = 0; p < s.depth; ++p) m = std::min(m, s.at(p, codes[p]));
        return m;
    }
    double log_sum = 0.0;
    for (std::uint32_t p = 0; p < s.depth; ++p)
        log_sum += std::log(s.at(p, codes[p]) + kLogEpsilon);
    return std::exp(log_sum / s.depth);
}

Sketch normalize_rows(const Sketch& s) {
    if (s.kind != SketchKind::counts)
        throw ContractError("normalize_rows expects a count sketch");
    Sketch out = s;
    out.kind = SketchKind::probabilities;
    for (std::uint32_t p = 0; p < s.depth; ++p) {
        double sum = 0.0;
        for (std::uint32_t w = 0; w < s.width; ++w) sum += s.at(p, w);
        if (sum <= 0.0)
            throw ContractError("degenerate sketch row " + std::to_string(p) +
                                " has zero sum");
        for (std::uint32_t w = 0; w < s.width; ++w) out.at(p, w) = s.at(p, w) / sum;
    }
    return out;
}

void ConcatSketch::append(std::string tag, Sketch s) {
    for (const auto& [t, unused] : parts_)
        if (t == tag) throw ContractError("duplicate sketch tag: " + tag);
    parts_.emplace_back(std::move(tag), std::move(s));
}

std::vector<double> ConcatSketch::flatten() const {
    std::vector<double> flat;
    flat.reserve(flat_size());
    for (const auto& [tag, s] : parts_) flat.insert(flat.end(), s.cells.begin(), s.cells.end());
    return flat;
}

std::size_t ConcatSketch::flat_size() const {
    std::size_t n = 0;
    for (const auto& [tag, s] : parts_) n += s.cells.size();
    return n;
}

ConcatSketch sketch_concat(std::vector<std::pair<std::string, Sketch>> parts) {
    ConcatSketch out;
    for (auto& [tag, s] : parts) out.append(std::move(tag), std::move(s));
    return out;
}

namespace {

void write_layout_header(std::ostream& out, std::uint32_t depth, std::uint32_t bits,
                         std::uint32_t width, std::uint32_t input_dim, std::uint64_t seed) {
    binio::write_u32(out, depth);
    binio::write_u32(out, bits);
    binio::write_u32(out, width);
    binio::write_u32(out, input_dim);
    binio::write_u64(out, seed);
}

}  // namespace

void save_sketch(const Sketch& s, std::ostream& out) {
    binio::write_magic(out, "FRS1");
    write_layout_header(out, s.depth, 0, s.width, 0, 0);
    binio::write_u8(out, s.kind == SketchKind::counts ? 0 : 1);
    for (double v : s.cells) binio::write_f64(out, v);
    out.flush();
    if (!out) throw IoError("failed writing sketch");
}

Sketch load_sketch(std::istream& in) {
    binio::expect_magic(in, "FRS1");
    Sketch s;
    s.depth = binio::read_u32(in);
    binio::read_u32(in);  // bits, unused for bare sketches
    s.width = binio::read_u32(in);
    binio::read_u32(in);  // input_dim
    binio::read_u64(in);  // seed
    s.kind = binio::read_u8(in) == 0 ? SketchKind::counts : SketchKind::probabilities;
    s.cells.resize(std::size_t(s.depth) * s.width);
    for (auto& v : s.cells) v = binio::read_f64(in);
    return s;
}

void save_item_codes(const ItemCodes& ic, std::ostream& out) {
    binio::write_magic(out, "FRK1");
    write_layout_header(out, ic.layout.depth, ic.layout.bits, ic.layout.width,
                        ic.layout.input_dim, ic.layout.seed);
    binio::write_u64(out, ic.labels.size());
    for (std::size_t i = 0; i < ic.labels.size(); ++i) {
        binio::write_string(out, ic.labels[i]);
        for (auto c : ic.codes[i]) binio::write_u32(out, c);
    }
    out.flush();
    if (!out) throw IoError("failed writing item codes");
}

ItemCodes load_item_codes(std::istream& in) {
    binio::expect_magic(in, "FRK1");
    const std::uint32_t depth = binio::read_u32(in);
    const std::uint32_t bits = binio::read_u32(in);
    const std::uint32_t width = binio::read_u32(in);
    const std::uint32_t input_dim = binio::read_u32(in);
    const std::uint64_t seed = binio::read_u64(in);
    ItemCodes ic;
    ic.layout = make_layout(depth, bits, input_dim, seed);
    if (ic.layout.width != width) throw IoError("inconsistent layout header");
    const std::uint64_t n = binio::read_u64(in);
    ic.labels.reserve(n);
    ic.codes.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        ic.labels.push_back(binio::read_string(in));
        CodeSet c(depth);
        for (auto& v : c) {
            v = binio::read_u32(in);
            if (v >= width) throw IoError("stored bucket index out of range");
        }
        ic.codes.push_back(std::move(c));
    }
    return ic;
}

void save_sketch_collection(const SketchCollection& sc, std::ostream& out) {
    binio::write_magic(out, "FRU1");
    binio::write_u32(out, sc.depth);
    binio::write_u32(out, sc.width);
    binio::write_u64(out, sc.keys.size());
    for (std::size_t i = 0; i < sc.keys.size(); ++i) {
        binio::write_string(out, sc.keys[i]);
        binio::write_u8(out, sc.sketches[i].kind == SketchKind::counts ? 0 : 1);
        for (double v : sc.sketches[i].cells) binio::write_f64(out, v);
    }
    out.flush();
    if (!out) throw IoError("failed writing sketch collection");
}

SketchCollection load_sketch_collection(std::istream& in) {
    binio::expect_magic(in, "FRU1");
    SketchCollection sc;
    sc.depth = binio::read_u32(in);
    sc.width = binio::read_u32(in);
    const std::uint64_t n = binio::read_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        sc.keys.push_back(binio::read_string(in));
        Sketch s;
        s.depth = sc.depth;
        s.width = sc.width;
        s.kind = binio::read_u8(in) == 0 ? SketchKind::counts : SketchKind::probabilities;
        s.cells.resize(std::size_t(sc.depth) * sc.width);
        for (auto& v : s.cells) v = binio::read_f64(in);
        sc.sketches.push_back(std::move(s));
    }
    return sc;
}

}  // namespace fusionrec
