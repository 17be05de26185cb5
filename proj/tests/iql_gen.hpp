#pragma once

// Random catalog and query generation for differential filter testing.

#include <sstream>
#include <string>
#include <vector>

#include "fusionrec/iql.hpp"
#include "fusionrec/rng.hpp"

namespace iql_gen {

inline fusionrec::iql::CatalogSchema test_schema() {
    using fusionrec::iql::ValueType;
    fusionrec::iql::CatalogSchema s;
    s.attributes = {{"price", ValueType::numeric},   {"rating", ValueType::numeric},
                    {"brand", ValueType::string},    {"category", ValueType::string},
                    {"colors", ValueType::string_list}, {"in_stock", ValueType::boolean}};
    return s;
}

// JSONL rows over test_schema() with ~10% nulls per attribute.
inline std::string random_catalog_jsonl(std::uint64_t seed, int n_items) {
    fusionrec::CounterRng rng(seed);
    const char* brands[] = {"acme", "zen", "orbit", "nova", "apex"};
    const char* categories[] = {"shoes", "bags", "hats"};
    const char* colors[] = {"red", "green", "blue", "black", "white"};
    std::ostringstream out;
    for (int i = 0; i < n_items; ++i) {
        out << "{\"id\": \"item" << i << "\"";
        if (rng.next_unit() > 0.1)
            out << ", \"price\": " << (rng.next_u64() % 2000) / 10.0;
        if (rng.next_unit() > 0.1)
            out << ", \"rating\": " << (rng.next_u64() % 50) / 10.0;
        if (rng.next_unit() > 0.1) out << ", \"brand\": \"" << brands[rng.next_u64() % 5] << "\"";
        if (rng.next_unit() > 0.1)
            out << ", \"category\": \"" << categories[rng.next_u64() % 3] << "\"";
        if (rng.next_unit() > 0.1) {
            out << ", \"colors\": [";
            const int k = static_cast<int>(rng.next_u64() % 4);
            for (int c = 0; c < k; ++c) {
                if (c) out << ", ";
                out << '"' << colors[rng.next_u64() % 5] << '"';
            }
            out << "]";
        }
        if (rng.next_unit() > 0.1)
            out << ", \"in_stock\": " << (rng.next_u64() % 2 ? "true" : "false");
        out << "}\n";
    }
    return out.str();
}

// Random well-typed query over test_schema().
inline std::string random_query(fusionrec::CounterRng& rng, int depth = 0) {
    const char* brands[] = {"acme", "zen", "orbit", "nova", "apex", "ghost"};
    const char* colors[] = {"red", "green", "blue", "black", "white", "pink"};
    const char* cmp_ops[] = {"==", "!=", "<", "<=", ">", ">="};

    auto leaf = [&]() -> std::string {
        switch (rng.next_u64() % 9) {
            case 0:
                return "price " + std::string(cmp_ops[rng.next_u64() % 6]) + " " +
                       std::to_string((rng.next_u64() % 2000) / 10.0);
            case 8:
                // literal on the left
                return std::to_string((rng.next_u64() % 2000) / 10.0) + " " +
                       std::string(cmp_ops[rng.next_u64() % 6]) + " price";
            case 1:
                return "rating " + std::string(cmp_ops[rng.next_u64() % 6]) + " " +
                       std::to_string((rng.next_u64() % 50) / 10.0);
            case 2:
                return "brand " + std::string(rng.next_u64() % 2 ? "==" : "!=") + " \"" +
                       brands[rng.next_u64() % 6] + "\"";
            case 3: {
                std::string q = "brand in [";
                const int k = 1 + static_cast<int>(rng.next_u64() % 3);
                for (int i = 0; i < k; ++i) {
                    if (i) q += ", ";
                    q += std::string("\"") + brands[rng.next_u64() % 6] + "\"";
                }
                return q + "]";
            }
            case 4:
                return std::string("\"") + colors[rng.next_u64() % 6] + "\" in colors";
            case 5:
                return std::string("colors contains \"") +
                       std::string(1, "rgbkwp"[rng.next_u64() % 6]) + "\"";
            case 6:
                return "in_stock";
            default:
                return "price " + std::string(rng.next_u64() % 2 ? ">" : "<=") + " rating";
        }
    };

    if (depth >= 3) return leaf();
    switch (rng.next_u64() % 6) {
        case 0:
            return "(" + random_query(rng, depth + 1) + " and " + random_query(rng, depth + 1) +
                   ")";
        case 1:
            return "(" + random_query(rng, depth + 1) + " or " + random_query(rng, depth + 1) +
                   ")";
        case 2:
            return "not " + random_query(rng, depth + 1);
        default:
            return leaf();
    }
}

}  // namespace iql_gen
