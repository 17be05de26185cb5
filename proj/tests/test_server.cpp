#include <sstream>
#include <thread>

#include "doctest.h"
#include "fusionrec/server.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace fusionrec;
using nlohmann::json;

namespace {

// Identical artifacts every call, so two engines replay identically.
std::shared_ptr<Engine> make_engine() {
    iql::CatalogSchema schema;
    schema.attributes = {{"price", iql::ValueType::numeric}};
    std::ostringstream jsonl;
    for (int i = 0; i < 8; ++i)
        jsonl << "{\"id\": \"item" << i << "\", \"price\": " << (i + 1) * 5 << "}\n";
    std::istringstream catalog_in(jsonl.str());

    EngineArtifacts a;
    a.catalog = load_catalog(catalog_in, schema);

    ItemCodes codes;
    codes.layout = make_layout(2, 2, 4, 9);
    CounterRng rng(3);
    for (int i = 0; i < 8; ++i) {
        codes.labels.push_back("item" + std::to_string(i));
        std::vector<double> v(4);
        for (auto& x : v) x = rng.next_gaussian();
        codes.codes.push_back(encode(v, codes.layout));
    }
    a.item_codes = std::move(codes);

    MlpConfig config;
    config.n_layers = 1;
    config.hidden_size = 4;
    config.input_size = 8;
    config.out_depth = 2;
    config.out_width = 4;
    config.seed = 1;
    a.models.emplace("", init_params(config));

    a.campaigns = load_campaigns(
        R"([{"name": "main", "type": "personalized", "k": 4, "variants": ["v1"]},
            {"name": "ab", "type": "personalized", "k": 4, "variants": ["v1", "v2"]}])",
        schema);
    a.bandit_seed = 77;
    return std::make_shared<Engine>(std::move(a));
}

}  // namespace

TEST_CASE("replaying a request sequence yields byte-identical responses") {
    Facade first(make_engine());
    Facade second(make_engine());
    first.set_ready(true);
    second.set_ready(true);
    const int port1 = first.listen_background("127.0.0.1");
    const int port2 = second.listen_background("127.0.0.1");
    httplib::Client c1("127.0.0.1", port1);
    httplib::Client c2("127.0.0.1", port2);

    // The "ab" campaign has two variants, so replay also exercises the
    // bandit's counter stream.
    const std::vector<std::pair<std::string, std::string>> sequence = {
        {"/recommend", R"({"campaign": "ab", "history": ["item0", "item3"]})"},
        {"/feedback", R"({"campaign": "ab", "variant": "v1", "reward": 1})"},
        {"/recommend", R"({"campaign": "ab", "history": ["item0", "item3"]})"},
        {"/recommend", R"({"campaign": "ab", "history": ["item5"]})"},
        {"/recommend", R"({"campaign": "main", "history": ["item2"], "k": 2})"},
    };
    for (const auto& [path, body] : sequence) {
        const auto r1 = c1.Post(path, body, "application/json");
        const auto r2 = c2.Post(path, body, "application/json");
        REQUIRE(r1);
        REQUIRE(r2);
        CHECK(r1->status == r2->status);
        CHECK(r1->body == r2->body);
    }
    first.stop();
    second.stop();
}

TEST_CASE("facade endpoints") {
    Facade facade(make_engine());
    const int port = facade.listen_background("127.0.0.1");
    httplib::Client client("127.0.0.1", port);

    SUBCASE("health returns ok even before warm-up") {
        const auto res = client.Get("/health");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(res->body == "ok");
    }

    SUBCASE("recommend and feedback answer 503 before warm-up") {
        const auto res = client.Post("/recommend", R"({"campaign": "main"})", "application/json");
        REQUIRE(res);
        CHECK(res->status == 503);
        const auto fb = client.Post(
            "/feedback", R"({"campaign": "main", "variant": "v1", "reward": 1})",
            "application/json");
        REQUIRE(fb);
        CHECK(fb->status == 503);
    }

    facade.set_ready(true);

    SUBCASE("recommend validates the body") {
        auto res = client.Post("/recommend", "{nonsense", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        res = client.Post("/recommend", R"({"campaign": "ghost"})", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(json::parse(res->body).contains("error"));
        res = client.Post("/recommend", R"({"campaign": "main", "k": -2})", "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        res = client.Post("/recommend", R"({"campaign": "main", "history": [17]})",
                          "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }

    SUBCASE("recommend returns ranked items with the variant") {
        const auto res = client.Post(
            "/recommend", R"({"campaign": "main", "history": ["item0", "item3"], "k": 3})",
            "application/json");
        REQUIRE(res);
        CHECK(res->status == 200);
        const json body = json::parse(res->body);
        CHECK(body["campaign"] == "main");
        CHECK(body["variant"] == "v1");
        CHECK(body["items"].size() == 3);
        CHECK(body["items"][0].contains("id"));
        CHECK(body["items"][0].contains("score"));
    }

    SUBCASE("feedback updates the bandit and rejects bad variants") {
        auto res = client.Post("/feedback",
                               R"({"campaign": "main", "variant": "v1", "reward": 1})",
                               "application/json");
        REQUIRE(res);
        CHECK(res->status == 200);
        res = client.Post("/feedback",
                          R"({"campaign": "main", "variant": "nope", "reward": 0})",
                          "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        res = client.Post("/feedback", R"({"campaign": "main", "variant": "v1", "reward": 3})",
                          "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }

    SUBCASE("identical concurrent requests return identical rankings") {
        const std::string request_body =
            R"({"campaign": "main", "history": ["item1", "item2"], "k": 4})";
        const auto reference = client.Post("/recommend", request_body, "application/json");
        REQUIRE(reference);
        const json expected_items = json::parse(reference->body)["items"];

        std::vector<std::thread> threads;
        std::vector<int> failures(8, 0);
        for (int t = 0; t < 8; ++t) {
            threads.emplace_back([&, t]() {
                httplib::Client local("127.0.0.1", port);
                for (int i = 0; i < 20; ++i) {
                    const auto res = local.Post("/recommend", request_body, "application/json");
                    if (!res || res->status != 200 ||
                        json::parse(res->body)["items"] != expected_items)
                        ++failures[t];
                }
            });
        }
        for (auto& t : threads) t.join();
        for (int t = 0; t < 8; ++t) CHECK(failures[t] == 0);
    }

    facade.stop();
}
