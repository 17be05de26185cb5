#include "fusionrec/server.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace fusionrec {

using nlohmann::json;

struct Facade::Impl {
    httplib::Server server;
    std::thread worker;
};

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

}  // namespace

Facade::Facade(std::shared_ptr<Engine> engine)
    : impl_(std::make_unique<Impl>()), engine_(std::move(engine)) {
    auto& server = impl_->server;

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    server.Post("/recommend", [this](const httplib::Request& req, httplib::Response& res) {
        if (!ready_.load()) {
            reply_error(res, 503, "warming up");
            return;
        }
        json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        if (body.is_discarded() || !body.is_object()) {
            reply_error(res, 400, "invalid JSON body");
            return;
        }
        if (!body.contains("campaign") || !body["campaign"].is_string()) {
            reply_error(res, 400, "missing campaign");
            return;
        }
        RecommendRequest request;
        request.campaign = body["campaign"].get<std::string>();
        if (body.contains("user") && body["user"].is_string())
            request.user = body["user"].get<std::string>();
        if (body.contains("history")) {
            if (!body["history"].is_array()) {
                reply_error(res, 400, "history must be an array of item ids");
                return;
            }
            for (const auto& it : body["history"]) {
                if (!it.is_string()) {
                    reply_error(res, 400, "history must be an array of item ids");
                    return;
                }
                request.history.push_back(it.get<std::string>());
            }
        }
        if (body.contains("k")) {
            if (!body["k"].is_number_integer() || body["k"].get<int>() < 1) {
                reply_error(res, 400, "k must be a positive integer");
                return;
            }
            request.k = body["k"].get<int>();
        }
        if (body.contains("context") && body["context"].is_object() &&
            body["context"].contains("item") && body["context"]["item"].is_string())
            request.context_item = body["context"]["item"].get<std::string>();

        try {
            const RecommendResponse out = engine_->recommend(request);
            json items = json::array();
            for (const auto& item : out.items)
                items.push_back({{"id", item.id}, {"score", item.score}});
            json resp{{"campaign", out.campaign},
                      {"variant", out.variant},
                      {"items", std::move(items)}};
            if (!out.reason.empty()) resp["reason"] = out.reason;
            res.set_content(resp.dump(), "application/json");
        } catch (const ContractError& e) {
            reply_error(res, 400, e.what());
        } catch (const Error& e) {
            reply_error(res, 500, e.what());
        }
    });

    server.Post("/feedback", [this](const httplib::Request& req, httplib::Response& res) {
        if (!ready_.load()) {
            reply_error(res, 503, "warming up");
            return;
        }
        json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
        if (body.is_discarded() || !body.is_object() || !body.contains("campaign") ||
            !body.contains("variant") || !body.contains("reward")) {
            reply_error(res, 400, "expected {campaign, variant, reward}");
            return;
        }
        if (!body["reward"].is_number_integer() ||
            (body["reward"].get<int>() != 0 && body["reward"].get<int>() != 1)) {
            reply_error(res, 400, "reward must be 0 or 1");
            return;
        }
        try {
            engine_->feedback(body["campaign"].get<std::string>(),
                              body["variant"].get<std::string>(), body["reward"].get<int>());
            res.set_content(json{{"ok", true}}.dump(), "application/json");
        } catch (const ContractError& e) {
            reply_error(res, 400, e.what());
        }
    });
}

Facade::~Facade() { stop(); }

bool Facade::listen(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int Facade::listen_background(const std::string& host) {
    const int port = impl_->server.bind_to_any_port(host);
    if (port < 0) throw Error("failed to bind server port");
    impl_->worker = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Facade::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
    if (impl_ && impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace fusionrec
