#include "fusionrec/catalog.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>
#include <unordered_set>

#include "fusionrec/binio.hpp"
#include "json.hpp"

namespace fusionrec {

Bitmap::Bitmap(std::uint64_t n, bool value) : n_(n), words_((n + 63) / 64, 0) {
    if (value) {
        for (auto& w : words_) w = ~0ull;
        if (n_ & 63) words_.back() &= (1ull << (n_ & 63)) - 1;
    }
}

void Bitmap::set(std::uint64_t i, bool value) {
    if (value)
        words_[i >> 6] |= 1ull << (i & 63);
    else
        words_[i >> 6] &= ~(1ull << (i & 63));
}

Bitmap& Bitmap::and_with(const Bitmap& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
}

Bitmap& Bitmap::or_with(const Bitmap& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

Bitmap& Bitmap::invert() {
    for (auto& w : words_) w = ~w;
    if (n_ & 63) words_.back() &= (1ull << (n_ & 63)) - 1;
    return *this;
}

std::uint64_t Bitmap::count() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
}

std::uint64_t CandidateSet::count() const {
    if (!count_cache_) count_cache_ = bits_.count();
    return *count_cache_;
}

std::vector<std::uint64_t> CandidateSet::to_ids() const {
    std::vector<std::uint64_t> ids;
    ids.reserve(count());
    for (std::uint64_t i = 0; i < bits_.size(); ++i)
        if (bits_.get(i)) ids.push_back(i);
    return ids;
}

void CandidateSet::save(std::ostream& out) const {
    binio::write_magic(out, "FRC1");
    binio::write_u64(out, bits_.size());
    for (auto w : bits_.words()) binio::write_u64(out, w);
    out.flush();
    if (!out) throw IoError("failed writing candidate set");
}

CandidateSet CandidateSet::load(std::istream& in) {
    binio::expect_magic(in, "FRC1");
    const std::uint64_t n = binio::read_u64(in);
    Bitmap bits(n);
    std::vector<std::uint64_t> words((n + 63) / 64);
    for (std::uint64_t i = 0; i < words.size(); ++i) words[i] = binio::read_u64(in);
    for (std::uint64_t i = 0; i < n; ++i)
        if ((words[i >> 6] >> (i & 63)) & 1) bits.set(i, true);
    return CandidateSet(std::move(bits));
}

std::optional<std::uint64_t> CompressedCatalog::row_of(const std::string& id) const {
    for (std::uint64_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return i;
    return std::nullopt;
}

namespace {

std::uint32_t dict_code(std::vector<std::string>& dict,
                        std::unordered_map<std::string, std::uint32_t>& lookup,
                        const std::string& value) {
    auto it = lookup.find(value);
    if (it != lookup.end()) return it->second;
    const auto code = static_cast<std::uint32_t>(dict.size());
    dict.push_back(value);
    lookup.emplace(value, code);
    return code;
}

struct RawItem {
    std::string id;
    std::vector<std::optional<ItemScalar>> attrs;
};

}  // namespace

CompressedCatalog load_catalog(std::istream& jsonl, const iql::CatalogSchema& schema) {
    CompressedCatalog catalog;
    catalog.schema = schema;

    std::vector<RawItem> items;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    while (std::getline(jsonl, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id")) {
            ++catalog.skipped_lines;
            continue;
        }
        std::string id;
        if (j["id"].is_string())
            id = j["id"].get<std::string>();
        else if (j["id"].is_number_integer())
            id = std::to_string(j["id"].get<std::int64_t>());
        else {
            ++catalog.skipped_lines;
            continue;
        }
        if (!seen_ids.insert(id).second) throw Error("duplicate item id: " + id);

        RawItem item;
        item.id = std::move(id);
        item.attrs.resize(schema.size());
        for (std::uint32_t a = 0; a < schema.size(); ++a) {
            const auto& [name, type] = schema.attributes[a];
            if (!j.contains(name) || j[name].is_null()) continue;
            const auto& v = j[name];
            switch (type) {
                case iql::ValueType::numeric:
                    if (v.is_number()) item.attrs[a] = v.get<double>();
                    break;
                case iql::ValueType::string:
                    if (v.is_string()) item.attrs[a] = v.get<std::string>();
                    break;
                case iql::ValueType::string_list:
                    if (v.is_array()) {
                        std::vector<std::string> list;
                        bool ok = true;
                        for (const auto& e : v) {
                            if (!e.is_string()) {
                                ok = false;
                                break;
                            }
                            list.push_back(e.get<std::string>());
                        }
                        if (ok) item.attrs[a] = std::move(list);
                    }
                    break;
                case iql::ValueType::boolean:
                    if (v.is_boolean()) item.attrs[a] = v.get<bool>();
                    break;
            }
        }
        items.push_back(std::move(item));
    }
    if (jsonl.bad()) throw IoError("failed reading catalog stream");

    const std::uint64_t n = items.size();
    catalog.n_items = n;
    catalog.ids.reserve(n);
    for (const auto& item : items) catalog.ids.push_back(item.id);
    catalog.null_counts.assign(schema.size(), 0);

    for (std::uint32_t a = 0; a < schema.size(); ++a) {
        const iql::ValueType type = schema.attributes[a].second;
        switch (type) {
            case iql::ValueType::numeric: {
                NumericColumn col;
                col.values.assign(n, 0.0);
                col.present = Bitmap(n);
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (items[i].attrs[a]) {
                        col.values[i] = std::get<double>(*items[i].attrs[a]);
                        col.present.set(i, true);
                    } else {
                        ++catalog.null_counts[a];
                    }
                }
                catalog.columns.emplace_back(std::move(col));
                break;
            }
            case iql::ValueType::string: {
                StringColumn col;
                col.codes.assign(n, 0);
                col.present = Bitmap(n);
                std::unordered_map<std::string, std::uint32_t> lookup;
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (items[i].attrs[a]) {
                        col.codes[i] =
                            dict_code(col.dict, lookup, std::get<std::string>(*items[i].attrs[a]));
                        col.present.set(i, true);
                    } else {
                        ++catalog.null_counts[a];
                    }
                }
                catalog.columns.emplace_back(std::move(col));
                break;
            }
            case iql::ValueType::string_list: {
                StringListColumn col;
                col.present = Bitmap(n);
                col.offsets.reserve(n + 1);
                col.offsets.push_back(0);
                std::unordered_map<std::string, std::uint32_t> lookup;
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (items[i].attrs[a]) {
                        for (const auto& s :
                             std::get<std::vector<std::string>>(*items[i].attrs[a]))
                            col.codes.push_back(dict_code(col.dict, lookup, s));
                        col.present.set(i, true);
                    } else {
                        ++catalog.null_counts[a];
                    }
                    col.offsets.push_back(col.codes.size());
                }
                catalog.columns.emplace_back(std::move(col));
                break;
            }
            case iql::ValueType::boolean: {
                BoolColumn col;
                col.values = Bitmap(n);
                col.present = Bitmap(n);
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (items[i].attrs[a]) {
                        col.values.set(i, std::get<bool>(*items[i].attrs[a]));
                        col.present.set(i, true);
                    } else {
                        ++catalog.null_counts[a];
                    }
                }
                catalog.columns.emplace_back(std::move(col));
                break;
            }
        }
    }
    return catalog;
}

std::vector<ItemRecord> decode_catalog(const CompressedCatalog& catalog) {
    std::vector<ItemRecord> rows(catalog.n_items);
    for (std::uint64_t i = 0; i < catalog.n_items; ++i) {
        rows[i].id = catalog.ids[i];
        rows[i].attrs.resize(catalog.schema.size());
    }
    for (std::uint32_t a = 0; a < catalog.schema.size(); ++a) {
        const Column& col = catalog.columns[a];
        for (std::uint64_t i = 0; i < catalog.n_items; ++i) {
            if (const auto* nc = std::get_if<NumericColumn>(&col)) {
                if (nc->present.get(i)) rows[i].attrs[a] = nc->values[i];
            } else if (const auto* sc = std::get_if<StringColumn>(&col)) {
                if (sc->present.get(i)) rows[i].attrs[a] = sc->dict[sc->codes[i]];
            } else if (const auto* lc = std::get_if<StringListColumn>(&col)) {
                if (lc->present.get(i)) {
                    std::vector<std::string> list;
                    for (std::uint64_t k = lc->offsets[i]; k < lc->offsets[i + 1]; ++k)
                        list.push_back(lc->dict[lc->codes[k]]);
                    rows[i].attrs[a] = std::move(list);
                }
            } else if (const auto* bc = std::get_if<BoolColumn>(&col)) {
                if (bc->present.get(i)) rows[i].attrs[a] = bc->values.get(i);
            }
        }
    }
    return rows;
}

namespace {

using iql::CmpOp;
using iql::Expr;
using iql::ValueType;

bool cmp_double(CmpOp op, double a, double b) {
    switch (op) {
        case CmpOp::eq: return a == b;
        case CmpOp::ne: return a != b;
        case CmpOp::lt: return a < b;
        case CmpOp::le: return a <= b;
        case CmpOp::gt: return a > b;
        case CmpOp::ge: return a >= b;
    }
    return false;
}

// ---- columnar path ----

Bitmap eval_columnar(const CompressedCatalog& catalog, const Expr& e);

const Column& column_of(const CompressedCatalog& catalog, const Expr& attr) {
    return catalog.columns[attr.attr_index];
}

Bitmap compare_numeric(const CompressedCatalog& catalog, const Expr& e) {
    const std::uint64_t n = catalog.n_items;
    Bitmap out(n);
    const bool lhs_attr = e.lhs->kind == Expr::Kind::attribute;
    const bool rhs_attr = e.rhs->kind == Expr::Kind::attribute;
    if (lhs_attr && rhs_attr) {
        const auto& a = std::get<NumericColumn>(column_of(catalog, *e.lhs));
        const auto& b = std::get<NumericColumn>(column_of(catalog, *e.rhs));
        for (std::uint64_t i = 0; i < n; ++i)
            if (a.present.get(i) && b.present.get(i) &&
                cmp_double(e.op, a.values[i], b.values[i]))
                out.set(i, true);
        return out;
    }
    const Expr& attr = lhs_attr ? *e.lhs : *e.rhs;
    const double lit = std::get<double>((lhs_attr ? *e.rhs : *e.lhs).literal);
    const auto& col = std::get<NumericColumn>(column_of(catalog, attr));
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!col.present.get(i)) continue;
        const bool hit = lhs_attr ? cmp_double(e.op, col.values[i], lit)
                                  : cmp_double(e.op, lit, col.values[i]);
        if (hit) out.set(i, true);
    }
    return out;
}

Bitmap compare_string(const CompressedCatalog& catalog, const Expr& e) {
    const std::uint64_t n = catalog.n_items;
    Bitmap out(n);
    const bool lhs_attr = e.lhs->kind == Expr::Kind::attribute;
    const bool rhs_attr = e.rhs->kind == Expr::Kind::attribute;
    const bool want_equal = e.op == CmpOp::eq;
    if (lhs_attr && rhs_attr) {
        const auto& a = std::get<StringColumn>(column_of(catalog, *e.lhs));
        const auto& b = std::get<StringColumn>(column_of(catalog, *e.rhs));
        for (std::uint64_t i = 0; i < n; ++i)
            if (a.present.get(i) && b.present.get(i) &&
                (a.dict[a.codes[i]] == b.dict[b.codes[i]]) == want_equal)
                out.set(i, true);
        return out;
    }
    const Expr& attr = lhs_attr ? *e.lhs : *e.rhs;
    const std::string& lit = std::get<std::string>((lhs_attr ? *e.rhs : *e.lhs).literal);
    const auto& col = std::get<StringColumn>(column_of(catalog, attr));
    // Exact byte equality resolves through the dictionary.
    std::int64_t lit_code = -1;
    for (std::size_t c = 0; c < col.dict.size(); ++c)
        if (col.dict[c] == lit) {
            lit_code = static_cast<std::int64_t>(c);
            break;
        }
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!col.present.get(i)) continue;
        const bool equal = static_cast<std::int64_t>(col.codes[i]) == lit_code;
        if (equal == want_equal) out.set(i, true);
    }
    return out;
}

Bitmap compare_boolean(const CompressedCatalog& catalog, const Expr& e) {
    const std::uint64_t n = catalog.n_items;
    Bitmap out(n);
    const bool lhs_attr = e.lhs->kind == Expr::Kind::attribute;
    const bool rhs_attr = e.rhs->kind == Expr::Kind::attribute;
    const bool want_equal = e.op == CmpOp::eq;
    if (lhs_attr && rhs_attr) {
        const auto& a = std::get<BoolColumn>(column_of(catalog, *e.lhs));
        const auto& b = std::get<BoolColumn>(column_of(catalog, *e.rhs));
        for (std::uint64_t i = 0; i < n; ++i)
            if (a.present.get(i) && b.present.get(i) &&
                (a.values.get(i) == b.values.get(i)) == want_equal)
                out.set(i, true);
        return out;
    }
    const Expr& attr = lhs_attr ? *e.lhs : *e.rhs;
    const bool lit = std::get<bool>((lhs_attr ? *e.rhs : *e.lhs).literal);
    const auto& col = std::get<BoolColumn>(column_of(catalog, attr));
    for (std::uint64_t i = 0; i < n; ++i)
        if (col.present.get(i) && (col.values.get(i) == lit) == want_equal) out.set(i, true);
    return out;
}

Bitmap eval_in(const CompressedCatalog& catalog, const Expr& e) {
    const std::uint64_t n = catalog.n_items;
    Bitmap out(n);
    if (e.rhs->kind == Expr::Kind::list_literal) {
        const Expr& lhs = *e.lhs;  // attribute (guaranteed by the parser rule)
        const Column& col = column_of(catalog, lhs);
        if (lhs.value_type == ValueType::numeric) {
            const auto& nc = std::get<NumericColumn>(col);
            std::vector<double> values;
            for (const auto& lit : e.rhs->list) values.push_back(std::get<double>(lit));
            for (std::uint64_t i = 0; i < n; ++i)
                if (nc.present.get(i) &&
                    std::find(values.begin(), values.end(), nc.values[i]) != values.end())
                    out.set(i, true);
        } else if (lhs.value_type == ValueType::string) {
            const auto& sc = std::get<StringColumn>(col);
            std::vector<std::uint8_t> member(sc.dict.size(), 0);
            for (const auto& lit : e.rhs->list) {
                const auto& s = std::get<std::string>(lit);
                for (std::size_t c = 0; c < sc.dict.size(); ++c)
                    if (sc.dict[c] == s) member[c] = 1;
            }
            for (std::uint64_t i = 0; i < n; ++i)
                if (sc.present.get(i) && member[sc.codes[i]]) out.set(i, true);
        } else {  // boolean
            const auto& bc = std::get<BoolColumn>(col);
            bool has_true = false, has_false = false;
            for (const auto& lit : e.rhs->list) (std::get<bool>(lit) ? has_true : has_false) = true;
            for (std::uint64_t i = 0; i < n; ++i)
                if (bc.present.get(i) && (bc.values.get(i) ? has_true : has_false))
                    out.set(i, true);
        }
        return out;
    }

    // rhs is a string_list attribute.
    const auto& lc = std::get<StringListColumn>(column_of(catalog, *e.rhs));
    if (e.lhs->kind == Expr::Kind::literal) {
        const auto& lit = std::get<std::string>(e.lhs->literal);
        std::int64_t code = -1;
        for (std::size_t c = 0; c < lc.dict.size(); ++c)
            if (lc.dict[c] == lit) {
                code = static_cast<std::int64_t>(c);
                break;
            }
        if (code < 0) return out;
        for (std::uint64_t i = 0; i < n; ++i) {
            if (!lc.present.get(i)) continue;
            for (std::uint64_t k = lc.offsets[i]; k < lc.offsets[i + 1]; ++k)
                if (static_cast<std::int64_t>(lc.codes[k]) == code) {
                    out.set(i, true);
                    break;
                }
        }
        return out;
    }
    // scalar string attribute in string_list attribute: map lhs dictionary
    // codes onto the list column's dictionary once, then scan row ranges.
    const auto& sc = std::get<StringColumn>(column_of(catalog, *e.lhs));
    std::unordered_map<std::string, std::uint32_t> rhs_lookup;
    for (std::uint32_t c = 0; c < lc.dict.size(); ++c) rhs_lookup.emplace(lc.dict[c], c);
    std::vector<std::int64_t> mapped(sc.dict.size(), -1);
    for (std::size_t c = 0; c < sc.dict.size(); ++c) {
        auto it = rhs_lookup.find(sc.dict[c]);
        if (it != rhs_lookup.end()) mapped[c] = it->second;
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!sc.present.get(i) || !lc.present.get(i)) continue;
        const std::int64_t code = mapped[sc.codes[i]];
        if (code < 0) continue;
        for (std::uint64_t k = lc.offsets[i]; k < lc.offsets[i + 1]; ++k)
            if (static_cast<std::int64_t>(lc.codes[k]) == code) {
                out.set(i, true);
                break;
            }
    }
    return out;
}

Bitmap eval_contains(const CompressedCatalog& catalog, const Expr& e) {
    const std::uint64_t n = catalog.n_items;
    Bitmap out(n);
    const bool rhs_literal = e.rhs->kind == Expr::Kind::literal;

    if (e.lhs->value_type == ValueType::string) {
        const auto& sc = std::get<StringColumn>(column_of(catalog, *e.lhs));
        if (rhs_literal) {
            const auto& needle = std::get<std::string>(e.rhs->literal);
            std::vector<std::uint8_t> hit(sc.dict.size(), 0);
            for (std::size_t c = 0; c < sc.dict.size(); ++c)
                hit[c] = sc.dict[c].find(needle) != std::string::npos;
            for (std::uint64_t i = 0; i < n; ++i)
                if (sc.present.get(i) && hit[sc.codes[i]]) out.set(i, true);
        } else {
            const auto& rc = std::get<StringColumn>(column_of(catalog, *e.rhs));
            for (std::uint64_t i = 0; i < n; ++i)
                if (sc.present.get(i) && rc.present.get(i) &&
                    sc.dict[sc.codes[i]].find(rc.dict[rc.codes[i]]) != std::string::npos)
                    out.set(i, true);
        }
        return out;
    }

    const auto& lc = std::get<StringListColumn>(column_of(catalog, *e.lhs));
    if (rhs_literal) {
        const auto& needle = std::get<std::string>(e.rhs->literal);
        std::vector<std::uint8_t> hit(lc.dict.size(), 0);
        for (std::size_t c = 0; c < lc.dict.size(); ++c)
            hit[c] = lc.dict[c].find(needle) != std::string::npos;
        for (std::uint64_t i = 0; i < n; ++i) {
            if (!lc.present.get(i)) continue;
            for (std::uint64_t k = lc.offsets[i]; k < lc.offsets[i + 1]; ++k)
                if (hit[lc.codes[k]]) {
                    out.set(i, true);
                    break;
                }
        }
    } else {
        const auto& rc = std::get<StringColumn>(column_of(catalog, *e.rhs));
        for (std::uint64_t i = 0; i < n; ++i) {
            if (!lc.present.get(i) || !rc.present.get(i)) continue;
            const std::string& needle = rc.dict[rc.codes[i]];
            for (std::uint64_t k = lc.offsets[i]; k < lc.offsets[i + 1]; ++k)
                if (lc.dict[lc.codes[k]].find(needle) != std::string::npos) {
                    out.set(i, true);
                    break;
                }
        }
    }
    return out;
}

Bitmap eval_columnar(const CompressedCatalog& catalog, const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::and_op: {
            Bitmap lhs = eval_columnar(catalog, *e.lhs);
            return lhs.and_with(eval_columnar(catalog, *e.rhs));
        }
        case Expr::Kind::or_op: {
            Bitmap lhs = eval_columnar(catalog, *e.lhs);
            return lhs.or_with(eval_columnar(catalog, *e.rhs));
        }
        case Expr::Kind::not_op: {
            Bitmap inner = eval_columnar(catalog, *e.lhs);
            return inner.invert();
        }
        case Expr::Kind::compare: {
            const ValueType t = e.lhs->kind == Expr::Kind::attribute ? e.lhs->value_type
                                                                     : e.rhs->value_type;
            if (t == ValueType::numeric) return compare_numeric(catalog, e);
            if (t == ValueType::string) return compare_string(catalog, e);
            return compare_boolean(catalog, e);
        }
        case Expr::Kind::in_op:
            return eval_in(catalog, e);
        case Expr::Kind::contains_op:
            return eval_contains(catalog, e);
        case Expr::Kind::attribute: {
            const auto& bc = std::get<BoolColumn>(column_of(catalog, e));
            Bitmap out = bc.values;
            return out.and_with(bc.present);
        }
        default:
            throw ContractError("expression is not a condition; run typecheck first");
    }
}

// ---- naive row-at-a-time path (reference semantics) ----

std::optional<ItemScalar> operand_value(const ItemRecord& row, const Expr& e) {
    if (e.kind == Expr::Kind::attribute) return row.attrs[e.attr_index];
    // literal
    if (std::holds_alternative<double>(e.literal)) return ItemScalar(std::get<double>(e.literal));
    if (std::holds_alternative<std::string>(e.literal))
        return ItemScalar(std::get<std::string>(e.literal));
    return ItemScalar(std::get<bool>(e.literal));
}

bool eval_row(const ItemRecord& row, const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::and_op:
            return eval_row(row, *e.lhs) && eval_row(row, *e.rhs);
        case Expr::Kind::or_op:
            return eval_row(row, *e.lhs) || eval_row(row, *e.rhs);
        case Expr::Kind::not_op:
            return !eval_row(row, *e.lhs);
        case Expr::Kind::compare: {
            const auto lhs = operand_value(row, *e.lhs);
            const auto rhs = operand_value(row, *e.rhs);
            if (!lhs || !rhs) return false;
            if (std::holds_alternative<double>(*lhs))
                return cmp_double(e.op, std::get<double>(*lhs), std::get<double>(*rhs));
            if (std::holds_alternative<std::string>(*lhs)) {
                const bool equal = std::get<std::string>(*lhs) == std::get<std::string>(*rhs);
                return e.op == CmpOp::eq ? equal : !equal;
            }
            const bool equal = std::get<bool>(*lhs) == std::get<bool>(*rhs);
            return e.op == CmpOp::eq ? equal : !equal;
        }
        case Expr::Kind::in_op: {
            const auto lhs = operand_value(row, *e.lhs);
            if (!lhs) return false;
            if (e.rhs->kind == Expr::Kind::list_literal) {
                for (const auto& lit : e.rhs->list) {
                    if (std::holds_alternative<double>(*lhs) &&
                        std::holds_alternative<double>(lit) &&
                        std::get<double>(*lhs) == std::get<double>(lit))
                        return true;
                    if (std::holds_alternative<std::string>(*lhs) &&
                        std::holds_alternative<std::string>(lit) &&
                        std::get<std::string>(*lhs) == std::get<std::string>(lit))
                        return true;
                    if (std::holds_alternative<bool>(*lhs) && std::holds_alternative<bool>(lit) &&
                        std::get<bool>(*lhs) == std::get<bool>(lit))
                        return true;
                }
                return false;
            }
            const auto rhs = operand_value(row, *e.rhs);
            if (!rhs) return false;
            const auto& list = std::get<std::vector<std::string>>(*rhs);
            return std::find(list.begin(), list.end(), std::get<std::string>(*lhs)) != list.end();
        }
        case Expr::Kind::contains_op: {
            const auto lhs = operand_value(row, *e.lhs);
            const auto rhs = operand_value(row, *e.rhs);
            if (!lhs || !rhs) return false;
            const auto& needle = std::get<std::string>(*rhs);
            if (std::holds_alternative<std::string>(*lhs))
                return std::get<std::string>(*lhs).find(needle) != std::string::npos;
            for (const auto& s : std::get<std::vector<std::string>>(*lhs))
                if (s.find(needle) != std::string::npos) return true;
            return false;
        }
        case Expr::Kind::attribute: {
            const auto v = row.attrs[e.attr_index];
            return v && std::get<bool>(*v);
        }
        default:
            throw ContractError("expression is not a condition; run typecheck first");
    }
}

}  // namespace

CandidateSet filter(const CompressedCatalog& catalog, const iql::Expr& typed) {
    return CandidateSet(eval_columnar(catalog, typed));
}

CandidateSet filter_naive(const std::vector<ItemRecord>& rows, const iql::Expr& typed) {
    Bitmap bits(rows.size());
    for (std::uint64_t i = 0; i < rows.size(); ++i)
        if (eval_row(rows[i], typed)) bits.set(i, true);
    return CandidateSet(bits);
}

}  // namespace fusionrec
