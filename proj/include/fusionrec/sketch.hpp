#pragma once

// Additive sketches over sign-LSH partitionings of an embedding space. Each of
// the D partitions hashes a vector to one of W = 2^b buckets via b random
// hyperplanes; multisets of items accumulate into D x W count cells that add
// elementwise and read out by count-min or geometric mean.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fusionrec/common.hpp"

namespace fusionrec {

struct SketchLayout {
    std::uint32_t depth = 0;      // D independent partitionings
    std::uint32_t bits = 0;       // b hyperplanes per partitioning
    std::uint32_t width = 0;      // W = 2^b buckets
    std::uint32_t input_dim = 0;  // dimensionality of encoded vectors
    std::uint64_t seed = 0;
    // depth * bits * input_dim Gaussian normals, plane-major:
    // hyperplanes[(p * bits + i) * input_dim + c].
    std::vector<double> hyperplanes;

    const double* plane(std::uint32_t partition, std::uint32_t i) const {
        return hyperplanes.data() +
               (static_cast<std::size_t>(partition) * bits + i) * input_dim;
    }
};

// Deterministically samples the hyperplane normals from (seed, partition,
// plane, coordinate) counter words through a Box-Muller transform.
SketchLayout make_layout(std::uint32_t depth, std::uint32_t bits, std::uint32_t input_dim,
                         std::uint64_t seed);

using CodeSet = std::vector<std::uint32_t>;  // one bucket per partition, < width

// Sign pattern of v against each partition's hyperplanes, first plane most
// significant. Ties v.h == 0 map to bit 1.
CodeSet encode(std::span<const double> v, const SketchLayout& layout);

enum class SketchKind { counts, probabilities };

struct Sketch {
    std::uint32_t depth = 0;
    std::uint32_t width = 0;
    SketchKind kind = SketchKind::counts;
    std::vector<double> cells;  // depth * width, row-major

    double& at(std::uint32_t p, std::uint32_t w) { return cells[std::size_t(p) * width + w]; }
    double at(std::uint32_t p, std::uint32_t w) const { return cells[std::size_t(p) * width + w]; }
};

Sketch zero_sketch(const SketchLayout& layout);

// Adds weight[i] into cell (p, codes[i][p]) for every partition p.
Sketch sketch_of_items(const std::vector<CodeSet>& codes, const std::vector<double>& weights,
                       const SketchLayout& layout);

// Elementwise sum; both operands must be count sketches of the same shape.
Sketch sketch_add(const Sketch& a, const Sketch& b);

enum class ReadoutMode { min, geomean };

inline constexpr double kLogEpsilon = 1e-9;

// min: count-min estimate (never underestimates). geomean: exp of the mean
// log cell with a 1e-9 floor inside the logarithm.
double readout(const Sketch& s, const CodeSet& codes, ReadoutMode mode);

// Counts -> probabilities by dividing every depth row by its sum.
// A zero row is a degenerate-row error.
Sketch normalize_rows(const Sketch& s);

// Ordered, uniquely tagged list of per-modality sketches.
class ConcatSketch {
public:
    void append(std::string tag, Sketch s);
    const std::vector<std::pair<std::string, Sketch>>& parts() const { return parts_; }
    // Row-major cells of every part, in declared order.
    std::vector<double> flatten() const;
    std::size_t flat_size() const;

private:
    std::vector<std::pair<std::string, Sketch>> parts_;
};

ConcatSketch sketch_concat(std::vector<std::pair<std::string, Sketch>> parts);

// Single-sketch binary format: magic "FRS1", layout header, row-major cells.
void save_sketch(const Sketch& s, std::ostream& out);
Sketch load_sketch(std::istream& in);

// Item codes file: magic "FRK1", layout parameters (hyperplanes are
// regenerated on load), then label + D bucket indices per item.
struct ItemCodes {
    SketchLayout layout;
    std::vector<std::string> labels;
    std::vector<CodeSet> codes;
};
void save_item_codes(const ItemCodes& ic, std::ostream& out);
ItemCodes load_item_codes(std::istream& in);

// Keyed sketch collection (per-user histories): magic "FRU1".
struct SketchCollection {
    std::uint32_t depth = 0;
    std::uint32_t width = 0;
    std::vector<std::string> keys;
    std::vector<Sketch> sketches;
};
void save_sketch_collection(const SketchCollection& sc, std::ostream& out);
SketchCollection load_sketch_collection(std::istream& in);

}  // namespace fusionrec
