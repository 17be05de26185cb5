// Concurrent-load check of the serve path: 32 parallel callers x 100 requests
// against a 100k-item catalog must all return 200 with rankings that are
// consistent per identical input.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>
#include <vector>

#include "fusionrec/engine.hpp"
#include "fusionrec/server.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace fusionrec;
using nlohmann::json;

int main() {
    const auto start = std::chrono::steady_clock::now();
    const int n_items = 100000;

    iql::CatalogSchema schema;
    schema.attributes = {{"price", iql::ValueType::numeric}};
    std::ostringstream jsonl;
    for (int i = 0; i < n_items; ++i)
        jsonl << "{\"id\": \"item" << i << "\", \"price\": " << (i % 500) << "}\n";
    std::istringstream catalog_in(jsonl.str());

    EngineArtifacts artifacts;
    artifacts.catalog = load_catalog(catalog_in, schema);

    ItemCodes codes;
    codes.layout = make_layout(8, 6, 16, 21);
    std::vector<double> v(16);
    for (int i = 0; i < n_items; ++i) {
        const std::string label = "item" + std::to_string(i);
        for (int j = 0; j < 16; ++j) v[j] = hash_init_value(label, j, 0);
        codes.labels.push_back(label);
        codes.codes.push_back(encode(v, codes.layout));
    }
    artifacts.item_codes = std::move(codes);

    MlpConfig config;
    config.n_layers = 2;
    config.hidden_size = 64;
    config.input_size = 8 * 64;
    config.out_depth = 8;
    config.out_width = 64;
    config.seed = 3;
    artifacts.models.emplace("", init_params(config));
    artifacts.campaigns = load_campaigns(
        R"([{"name": "main", "type": "personalized", "k": 20, "variants": ["v1"]}])", schema);

    Facade facade(std::make_shared<Engine>(std::move(artifacts)));
    facade.set_ready(true);
    const int port = facade.listen_background("127.0.0.1");

    // Four distinct request bodies; every caller must see the same ranking
    // for the same body.
    std::vector<std::string> bodies;
    for (int b = 0; b < 4; ++b) {
        std::ostringstream body;
        body << "{\"campaign\": \"main\", \"history\": [\"item" << b * 1000 << "\", \"item"
             << b * 2000 + 1 << "\"]}";
        bodies.push_back(body.str());
    }
    std::vector<json> reference(bodies.size());
    {
        httplib::Client probe("127.0.0.1", port);
        for (std::size_t b = 0; b < bodies.size(); ++b) {
            const auto res = probe.Post("/recommend", bodies[b], "application/json");
            if (!res || res->status != 200) {
                std::printf("load harness FAIL (reference request failed)\n");
                return 1;
            }
            reference[b] = json::parse(res->body)["items"];
        }
    }

    const int n_threads = 32, per_thread = 100;
    std::atomic<int> bad{0};
    std::vector<std::thread> callers;
    for (int t = 0; t < n_threads; ++t) {
        callers.emplace_back([&, t]() {
            httplib::Client client("127.0.0.1", port);
            client.set_connection_timeout(30, 0);
            client.set_read_timeout(60, 0);
            const std::string& body = bodies[t % bodies.size()];
            const json& expected = reference[t % bodies.size()];
            for (int i = 0; i < per_thread; ++i) {
                const auto res = client.Post("/recommend", body, "application/json");
                if (!res || res->status != 200 || json::parse(res->body)["items"] != expected)
                    ++bad;
            }
        });
    }
    for (auto& t : callers) t.join();
    facade.stop();

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("load harness: %d callers x %d requests on %d items, %d bad responses, %.1f s\n",
                n_threads, per_thread, n_items, bad.load(), elapsed);
    if (bad.load() != 0) {
        std::printf("load harness FAIL\n");
        return 1;
    }
    std::printf("load harness PASS\n");
    return 0;
}
