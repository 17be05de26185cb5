#include <sstream>

#include "doctest.h"
#include "fusionrec/catalog.hpp"
#include "iql_gen.hpp"

using namespace fusionrec;

namespace {

CompressedCatalog small_catalog() {
    iql::CatalogSchema schema;
    schema.attributes = {{"price", iql::ValueType::numeric},
                         {"brand", iql::ValueType::string},
                         {"colors", iql::ValueType::string_list},
                         {"in_stock", iql::ValueType::boolean}};
    std::istringstream in(
        R"({"id": "a", "price": 5, "brand": "acme", "colors": ["red", "blue"], "in_stock": true}
{"id": "b", "price": 10, "colors": ["green"], "in_stock": false}
{"id": "c", "price": 20, "brand": "zen"}
)");
    return load_catalog(in, schema);
}

CandidateSet run_filter(const CompressedCatalog& catalog, const std::string& query) {
    auto ast = iql::parse(query);
    iql::typecheck(*ast, catalog.schema);
    return filter(catalog, *ast);
}

}  // namespace

TEST_CASE("load_catalog columnar layout") {
    const CompressedCatalog c = small_catalog();
    REQUIRE(c.n_items == 3);
    const auto& price = std::get<NumericColumn>(c.columns[0]);
    CHECK(price.values == std::vector<double>{5.0, 10.0, 20.0});
    CHECK(c.null_counts[0] == 0);
    CHECK(c.null_counts[1] == 1);  // b has no brand
    CHECK(c.null_counts[2] == 1);  // c has no colors
    CHECK(c.skipped_lines == 0);
}

TEST_CASE("load_catalog counts malformed lines and rejects duplicate ids") {
    iql::CatalogSchema schema;
    schema.attributes = {{"price", iql::ValueType::numeric}};
    std::istringstream bad("{\"id\": \"a\"}\nnot json\n{\"price\": 3}\n");
    const CompressedCatalog c = load_catalog(bad, schema);
    CHECK(c.n_items == 1);
    CHECK(c.skipped_lines == 2);

    std::istringstream dup("{\"id\": \"a\"}\n{\"id\": \"a\"}\n");
    CHECK_THROWS_AS(load_catalog(dup, schema), Error);
}

TEST_CASE("missing attribute comparisons are false, including negation collapse") {
    const CompressedCatalog c = small_catalog();
    // b has no brand: equality and inequality both miss it.
    CHECK(run_filter(c, "brand == \"acme\"").to_ids() == std::vector<std::uint64_t>{0});
    CHECK(run_filter(c, "brand != \"acme\"").to_ids() == std::vector<std::uint64_t>{2});
    // not(brand == ...) re-includes the null row: nulls collapse before negation.
    CHECK(run_filter(c, "not brand == \"acme\"").to_ids() ==
          std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("filter basic predicates") {
    const CompressedCatalog c = small_catalog();
    CHECK(run_filter(c, "price > 7").to_ids() == std::vector<std::uint64_t>{1, 2});
    CHECK(run_filter(c, "price > 7 or price <= 7").count() == 3);
    CHECK(run_filter(c, "\"red\" in colors").to_ids() == std::vector<std::uint64_t>{0});
    CHECK(run_filter(c, "colors contains \"re\"").to_ids() ==
          std::vector<std::uint64_t>{0, 1});  // red and green both contain "re"
    CHECK(run_filter(c, "in_stock").to_ids() == std::vector<std::uint64_t>{0});
    CHECK(run_filter(c, "brand in [\"acme\", \"zen\"]").to_ids() ==
          std::vector<std::uint64_t>{0, 2});
}

TEST_CASE("decode round trip is lossless") {
    const std::string jsonl = iql_gen::random_catalog_jsonl(42, 500);
    std::istringstream in1(jsonl);
    const CompressedCatalog c1 = load_catalog(in1, iql_gen::test_schema());
    const auto rows = decode_catalog(c1);

    // Re-encode the decoded rows and compare the full structure.
    std::ostringstream rebuilt;
    for (const auto& row : rows) {
        rebuilt << "{\"id\": \"" << row.id << "\"";
        for (std::size_t a = 0; a < row.attrs.size(); ++a) {
            if (!row.attrs[a]) continue;
            rebuilt << ", \"" << c1.schema.attributes[a].first << "\": ";
            if (const auto* d = std::get_if<double>(&*row.attrs[a])) {
                rebuilt << *d;
            } else if (const auto* s = std::get_if<std::string>(&*row.attrs[a])) {
                rebuilt << '"' << *s << '"';
            } else if (const auto* l = std::get_if<std::vector<std::string>>(&*row.attrs[a])) {
                rebuilt << '[';
                for (std::size_t i = 0; i < l->size(); ++i)
                    rebuilt << (i ? ", " : "") << '"' << (*l)[i] << '"';
                rebuilt << ']';
            } else {
                rebuilt << (std::get<bool>(*row.attrs[a]) ? "true" : "false");
            }
        }
        rebuilt << "}\n";
    }
    std::istringstream in2(rebuilt.str());
    const CompressedCatalog c2 = load_catalog(in2, iql_gen::test_schema());

    CHECK(c1.ids == c2.ids);
    for (std::size_t a = 0; a < c1.columns.size(); ++a) {
        if (const auto* n1 = std::get_if<NumericColumn>(&c1.columns[a])) {
            const auto& n2 = std::get<NumericColumn>(c2.columns[a]);
            CHECK(n1->values == n2.values);
            CHECK(n1->present == n2.present);
        } else if (const auto* s1 = std::get_if<StringColumn>(&c1.columns[a])) {
            const auto& s2 = std::get<StringColumn>(c2.columns[a]);
            CHECK(s1->dict == s2.dict);
            CHECK(s1->codes == s2.codes);
            CHECK(s1->present == s2.present);
        } else if (const auto* l1 = std::get_if<StringListColumn>(&c1.columns[a])) {
            const auto& l2 = std::get<StringListColumn>(c2.columns[a]);
            CHECK(l1->dict == l2.dict);
            CHECK(l1->offsets == l2.offsets);
            CHECK(l1->codes == l2.codes);
            CHECK(l1->present == l2.present);
        } else {
            const auto& b1 = std::get<BoolColumn>(c1.columns[a]);
            const auto& b2 = std::get<BoolColumn>(c2.columns[a]);
            CHECK(b1.values == b2.values);
            CHECK(b1.present == b2.present);
        }
    }
}

TEST_CASE("filter equals naive oracle on random query load") {
    std::istringstream in(iql_gen::random_catalog_jsonl(7, 2000));
    const CompressedCatalog catalog = load_catalog(in, iql_gen::test_schema());
    const auto rows = decode_catalog(catalog);

    CounterRng rng(1234);
    for (int q = 0; q < 200; ++q) {
        const std::string query = iql_gen::random_query(rng);
        CAPTURE(query);
        auto ast = iql::parse(query);
        iql::typecheck(*ast, catalog.schema);
        const CandidateSet fast = filter(catalog, *ast);
        const CandidateSet slow = filter_naive(rows, *ast);
        CHECK(fast == slow);
    }
}

TEST_CASE("De Morgan equivalence under the null-collapse rule") {
    std::istringstream in(iql_gen::random_catalog_jsonl(9, 800));
    const CompressedCatalog catalog = load_catalog(in, iql_gen::test_schema());
    CounterRng rng(55);
    for (int q = 0; q < 40; ++q) {
        const std::string a = iql_gen::random_query(rng, 2);
        const std::string b = iql_gen::random_query(rng, 2);
        const CandidateSet lhs = run_filter(catalog, "not (" + a + " and " + b + ")");
        const CandidateSet rhs = run_filter(catalog, "(not " + a + ") or (not " + b + ")");
        CHECK(lhs == rhs);
    }
}

TEST_CASE("adding a conjunct never enlarges the candidate set") {
    std::istringstream in(iql_gen::random_catalog_jsonl(13, 800));
    const CompressedCatalog catalog = load_catalog(in, iql_gen::test_schema());
    CounterRng rng(66);
    for (int q = 0; q < 40; ++q) {
        const std::string a = iql_gen::random_query(rng, 2);
        const std::string b = iql_gen::random_query(rng, 2);
        const CandidateSet base = run_filter(catalog, a);
        const CandidateSet narrowed = run_filter(catalog, "(" + a + ") and (" + b + ")");
        CHECK(narrowed.count() <= base.count());
        for (std::uint64_t i = 0; i < catalog.n_items; ++i)
            if (narrowed.contains(i)) CHECK(base.contains(i));
    }
}

TEST_CASE("filter_naive reproduces the reference cases directly") {
    const CompressedCatalog c = small_catalog();
    const auto rows = decode_catalog(c);
    auto run_naive = [&](const std::string& query) {
        auto ast = iql::parse(query);
        iql::typecheck(*ast, c.schema);
        return filter_naive(rows, *ast);
    };
    CHECK(run_naive("price > 7").to_ids() == std::vector<std::uint64_t>{1, 2});
    CHECK(run_naive("price > 7 or price <= 7").count() == 3);
    CHECK(run_naive("\"red\" in colors").to_ids() == std::vector<std::uint64_t>{0});
}

TEST_CASE("empty catalog filters to an empty set") {
    iql::CatalogSchema schema;
    schema.attributes = {{"price", iql::ValueType::numeric}};
    std::istringstream in("");
    const CompressedCatalog catalog = load_catalog(in, schema);
    CHECK(catalog.n_items == 0);
    auto ast = iql::parse("price > 7");
    iql::typecheck(*ast, schema);
    CHECK(filter(catalog, *ast).count() == 0);
    CHECK(filter_naive({}, *ast).count() == 0);
}

TEST_CASE("candidate set serialization round trip") {
    const CompressedCatalog c = small_catalog();
    const CandidateSet set = run_filter(c, "price > 7");
    std::stringstream buffer;
    set.save(buffer);
    const CandidateSet back = CandidateSet::load(buffer);
    CHECK(back == set);
    CHECK(back.count() == 2);
}
