#pragma once

// Compressed columnar item catalog and the two filter evaluators: the
// vectorized columnar path used in production and the row-at-a-time reference
// interpreter used as its differential-testing oracle.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "fusionrec/iql.hpp"

namespace fusionrec {

// Fixed-length bitset with word-level boolean algebra. Bits past size() stay
// zero so complement/popcount behave on any length.
class Bitmap {
public:
    Bitmap() = default;
    explicit Bitmap(std::uint64_t n, bool value = false);

    std::uint64_t size() const { return n_; }
    bool get(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set(std::uint64_t i, bool value);

    Bitmap& and_with(const Bitmap& other);
    Bitmap& or_with(const Bitmap& other);
    Bitmap& invert();

    std::uint64_t count() const;
    const std::vector<std::uint64_t>& words() const { return words_; }

    bool operator==(const Bitmap& other) const = default;

private:
    std::uint64_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

// Bitset over item ids with a popcount cache, the structure handed from the
// items filter to recommendation logic.
class CandidateSet {
public:
    CandidateSet() = default;
    explicit CandidateSet(Bitmap bits) : bits_(std::move(bits)) {}

    std::uint64_t size() const { return bits_.size(); }
    bool contains(std::uint64_t id) const { return bits_.get(id); }
    std::uint64_t count() const;
    const Bitmap& bits() const { return bits_; }
    std::vector<std::uint64_t> to_ids() const;

    bool operator==(const CandidateSet& other) const { return bits_ == other.bits_; }

    // Serialized form: magic "FRC1", bit length, raw little-endian words.
    void save(std::ostream& out) const;
    static CandidateSet load(std::istream& in);

private:
    Bitmap bits_;
    mutable std::optional<std::uint64_t> count_cache_;
};

struct NumericColumn {
    std::vector<double> values;
    Bitmap present;
};

struct StringColumn {
    std::vector<std::string> dict;  // first-appearance order
    std::vector<std::uint32_t> codes;
    Bitmap present;
};

struct StringListColumn {
    std::vector<std::string> dict;
    std::vector<std::uint64_t> offsets;  // n_items + 1
    std::vector<std::uint32_t> codes;
    Bitmap present;
};

struct BoolColumn {
    Bitmap values;
    Bitmap present;
};

using Column = std::variant<NumericColumn, StringColumn, StringListColumn, BoolColumn>;

struct CompressedCatalog {
    iql::CatalogSchema schema;
    std::uint64_t n_items = 0;
    std::vector<std::string> ids;  // item id per row, input order
    std::vector<Column> columns;   // one per schema attribute
    std::vector<std::uint64_t> null_counts;
    std::uint64_t skipped_lines = 0;

    std::optional<std::uint64_t> row_of(const std::string& id) const;
};

// One JSON object per line carrying "id" plus schema attributes; missing
// attributes become nulls. Malformed lines are skipped and counted; a
// duplicate id is an error.
CompressedCatalog load_catalog(std::istream& jsonl, const iql::CatalogSchema& schema);

using ItemScalar = std::variant<double, std::string, std::vector<std::string>, bool>;

struct ItemRecord {
    std::string id;
    std::vector<std::optional<ItemScalar>> attrs;  // schema order
};

// Decompresses rows for round-trip checks and the naive filter.
std::vector<ItemRecord> decode_catalog(const CompressedCatalog& catalog);

// Columnar evaluation of a typechecked expression. Comparisons involving a
// null are false; `not` negates after that collapse.
CandidateSet filter(const CompressedCatalog& catalog, const iql::Expr& typed);

// Reference row-at-a-time interpreter with identical semantics.
CandidateSet filter_naive(const std::vector<ItemRecord>& rows, const iql::Expr& typed);

}  // namespace fusionrec
