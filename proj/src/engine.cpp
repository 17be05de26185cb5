#include "fusionrec/engine.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace fusionrec {

std::vector<Campaign> load_campaigns(const std::string& json_text,
                                     const iql::CatalogSchema& schema) {
    const auto doc = nlohmann::json::parse(json_text);
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
        if (!doc.contains("campaigns")) throw ContractError("missing \"campaigns\" array");
        list = &doc["campaigns"];
    }
    if (!list->is_array()) throw ContractError("campaigns must be a JSON array");

    std::vector<Campaign> campaigns;
    for (const auto& j : *list) {
        Campaign c;
        c.name = j.at("name").get<std::string>();
        const std::string type = j.at("type").get<std::string>();
        if (type == "similar_items")
            c.type = CampaignType::similar_items;
        else if (type == "personalized")
            c.type = CampaignType::personalized;
        else
            throw ContractError("campaign " + c.name + ": unknown type " + type);
        if (j.contains("filter") && !j["filter"].is_null()) {
            c.filter_text = j["filter"].get<std::string>();
            auto ast = iql::parse(*c.filter_text);  // validate now, at load
            iql::typecheck(*ast, schema);
        }
        c.k = j.value("k", 10);
        if (c.k < 1) throw ContractError("campaign " + c.name + ": k must be >= 1");
        if (j.contains("variants"))
            c.variants = j["variants"].get<std::vector<std::string>>();
        if (c.variants.empty()) c.variants.push_back("default");
        for (const auto& name : campaigns)
            if (name.name == c.name) throw ContractError("duplicate campaign name: " + c.name);
        campaigns.push_back(std::move(c));
    }
    return campaigns;
}

std::vector<std::pair<std::uint32_t, double>> similar_items(std::uint32_t item_row,
                                                            const EmbeddingMatrix& embeddings,
                                                            int k,
                                                            const CandidateSet* restrict_to) {
    if (item_row >= embeddings.n_rows) throw ContractError("unknown item row");
    if (k < 1) throw ContractError("k must be >= 1");

    const double* query = embeddings.row(item_row);
    double query_norm = 0.0;
    for (std::uint64_t j = 0; j < embeddings.dim; ++j) query_norm += query[j] * query[j];
    query_norm = std::sqrt(query_norm);

    std::vector<std::pair<std::uint32_t, double>> scored;
    for (std::uint64_t r = 0; r < embeddings.n_rows; ++r) {
        if (r == item_row) continue;  // self-exclusion, even when it passes the filter
        if (restrict_to && !restrict_to->contains(r)) continue;
        const double* row = embeddings.row(r);
        double dot = 0.0, norm = 0.0;
        for (std::uint64_t j = 0; j < embeddings.dim; ++j) {
            dot += query[j] * row[j];
            norm += row[j] * row[j];
        }
        const double denom = query_norm * std::sqrt(norm);
        scored.emplace_back(static_cast<std::uint32_t>(r), denom > 0.0 ? dot / denom : 0.0);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
    return scored;
}

Engine::Engine(EngineArtifacts artifacts) : artifacts_(std::move(artifacts)) {
    const auto& catalog = artifacts_.catalog;
    item_rows_.reserve(catalog.n_items);
    for (std::uint64_t i = 0; i < catalog.n_items; ++i) item_rows_.emplace(catalog.ids[i], i);

    row_code_.assign(catalog.n_items, std::nullopt);
    if (artifacts_.item_codes) {
        const auto& codes = *artifacts_.item_codes;
        for (std::uint32_t c = 0; c < codes.labels.size(); ++c) {
            auto it = item_rows_.find(codes.labels[c]);
            if (it != item_rows_.end()) row_code_[it->second] = c;
        }
    }
    for (std::uint64_t row = 0; row < catalog.n_items; ++row)
        if (row_code_[row])
            all_candidates_.emplace_back(static_cast<std::uint32_t>(row),
                                         artifacts_.item_codes->codes[*row_code_[row]]);

    row_embedding_.assign(catalog.n_items, std::nullopt);
    if (artifacts_.embeddings) {
        const auto& emb = *artifacts_.embeddings;
        for (std::uint64_t r = 0; r < emb.labels.size(); ++r) {
            auto it = item_rows_.find(emb.labels[r]);
            if (it != item_rows_.end()) row_embedding_[it->second] = r;
        }
    }

    // Popularity: interaction counts from the history log, ties to lower rows.
    std::vector<std::uint64_t> counts(catalog.n_items, 0);
    for (const auto& session : artifacts_.history_log.sessions) {
        user_history_[session.id] = session.items;
        for (const auto& item : session.items) {
            auto it = item_rows_.find(item);
            if (it != item_rows_.end()) ++counts[it->second];
        }
    }
    popularity_.resize(catalog.n_items);
    for (std::uint32_t i = 0; i < catalog.n_items; ++i) popularity_[i] = i;
    std::stable_sort(popularity_.begin(), popularity_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return counts[a] > counts[b]; });

    for (const auto& c : artifacts_.campaigns) {
        bandits_.emplace(c.name,
                         BanditState(c.variants.size(),
                                     counter_mix(artifacts_.bandit_seed, fnv1a64(c.name))));
    }
}

const Campaign& Engine::campaign(const std::string& name) const {
    for (const auto& c : artifacts_.campaigns)
        if (c.name == name) return c;
    throw ContractError("unknown campaign: " + name);
}

const MlpParams& Engine::model_for(const std::string& variant) const {
    auto it = artifacts_.models.find(variant);
    if (it != artifacts_.models.end()) return it->second;
    it = artifacts_.models.find("");
    if (it != artifacts_.models.end()) return it->second;
    throw ContractError("no model available for variant " + variant);
}

std::vector<std::string> Engine::resolve_history(const RecommendRequest& request) const {
    if (!request.history.empty()) return request.history;
    auto it = user_history_.find(request.user);
    if (it != user_history_.end()) return it->second;
    return {};
}

RecommendResponse Engine::popularity_fallback(const Campaign& c, int k,
                                              const std::string& reason) {
    RecommendResponse resp;
    resp.campaign = c.name;
    resp.reason = reason;
    for (std::uint32_t row : popularity_) {
        if (resp.items.size() == static_cast<std::size_t>(k)) break;
        resp.items.push_back({artifacts_.catalog.ids[row], 0.0});
    }
    return resp;
}

RecommendResponse Engine::recommend(const RecommendRequest& request) {
    const Campaign& c = campaign(request.campaign);
    const int k = request.k.value_or(c.k);
    if (k < 1) throw ContractError("k must be >= 1");

    std::optional<CandidateSet> candidates;
    if (c.filter_text) {
        auto ast = iql::parse(*c.filter_text);
        iql::typecheck(*ast, artifacts_.catalog.schema);
        candidates = filter(artifacts_.catalog, *ast);
        if (candidates->count() == 0) {
            RecommendResponse resp;
            resp.campaign = c.name;
            resp.reason = "filter_exhausted";
            return resp;
        }
    }

    const std::vector<std::string> history = resolve_history(request);

    if (c.type == CampaignType::similar_items) {
        std::string anchor;
        if (request.context_item)
            anchor = *request.context_item;
        else if (!history.empty())
            anchor = history.back();
        if (anchor.empty()) return popularity_fallback(c, k, "cold_start");
        auto row_it = item_rows_.find(anchor);
        if (row_it == item_rows_.end()) throw ContractError("unknown item: " + anchor);
        if (!artifacts_.embeddings || !row_embedding_[row_it->second])
            throw ContractError("item has no embedding: " + anchor);

        std::string variant;
        {
            std::lock_guard<std::mutex> lock(bandit_mutex_);
            BanditState& bandit = bandits_.at(c.name);
            variant = c.variants[bandit.select_variant()];
        }

        // The filter applies over embedding rows mapped back to catalog rows.
        Bitmap allowed(artifacts_.embeddings->n_rows);
        for (std::uint64_t row = 0; row < artifacts_.catalog.n_items; ++row) {
            if (!row_embedding_[row]) continue;
            if (!candidates || candidates->contains(row)) allowed.set(*row_embedding_[row], true);
        }
        CandidateSet embedding_candidates{std::move(allowed)};
        auto ranked = similar_items(static_cast<std::uint32_t>(*row_embedding_[row_it->second]),
                                    *artifacts_.embeddings, k, &embedding_candidates);
        RecommendResponse resp;
        resp.campaign = c.name;
        resp.variant = variant;
        for (const auto& [emb_row, score] : ranked)
            resp.items.push_back({artifacts_.embeddings->labels[emb_row], score});
        return resp;
    }

    // Personalized flow.
    if (!artifacts_.item_codes) throw ContractError("personalized campaign requires item codes");
    std::vector<CodeSet> history_codes;
    for (const auto& item : history) {
        auto it = item_rows_.find(item);
        if (it == item_rows_.end()) continue;  // unknown history items are skipped
        if (row_code_[it->second]) history_codes.push_back(
            artifacts_.item_codes->codes[*row_code_[it->second]]);
    }
    if (history_codes.empty()) return popularity_fallback(c, k, "cold_start");

    std::string variant;
    {
        std::lock_guard<std::mutex> lock(bandit_mutex_);
        BanditState& bandit = bandits_.at(c.name);
        variant = c.variants[bandit.select_variant()];
    }
    const MlpParams& model = model_for(variant);

    const std::vector<double> input = history_input(history_codes, artifacts_.item_codes->layout);
    std::vector<std::pair<std::uint32_t, CodeSet>> filtered;
    if (candidates) {
        for (const auto& entry : all_candidates_)
            if (candidates->contains(entry.first)) filtered.push_back(entry);
    }
    auto ranked = score_candidates(model, input, candidates ? filtered : all_candidates_,
                                   static_cast<std::size_t>(k));

    RecommendResponse resp;
    resp.campaign = c.name;
    resp.variant = variant;
    for (const auto& [row, score] : ranked)
        resp.items.push_back({artifacts_.catalog.ids[row], score});
    if (resp.items.empty()) resp.reason = "no_scorable_candidates";
    return resp;
}

void Engine::feedback(const std::string& campaign_name, const std::string& variant, int reward) {
    const Campaign& c = campaign(campaign_name);
    const auto it = std::find(c.variants.begin(), c.variants.end(), variant);
    if (it == c.variants.end())
        throw ContractError("unknown variant " + variant + " for campaign " + campaign_name);
    std::lock_guard<std::mutex> lock(bandit_mutex_);
    bandits_.at(campaign_name)
        .record_feedback(static_cast<std::size_t>(it - c.variants.begin()), reward);
}

}  // namespace fusionrec
