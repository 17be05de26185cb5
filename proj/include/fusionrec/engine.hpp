#pragma once

// Recommendation facade: campaign rules, Thompson-sampling variant selection,
// similar-item and personalized flows, popularity cold-start fallback.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fusionrec/bandit.hpp"
#include "fusionrec/catalog.hpp"
#include "fusionrec/embedding.hpp"
#include "fusionrec/scorer.hpp"
#include "fusionrec/sessions.hpp"
#include "fusionrec/sketch.hpp"

namespace fusionrec {

enum class CampaignType { similar_items, personalized };

struct Campaign {
    std::string name;
    CampaignType type = CampaignType::personalized;
    std::optional<std::string> filter_text;  // IQL, validated at load
    int k = 10;
    std::vector<std::string> variants;  // model/config ids, >= 1
};

// Parses a campaigns.json document (top-level array or {"campaigns": [...]})
// and validates every filter against the schema.
std::vector<Campaign> load_campaigns(const std::string& json_text,
                                     const iql::CatalogSchema& schema);

// Cosine-similarity top-k among (optionally filtered) items, excluding the
// query item itself; ties broken by ascending item row.
std::vector<std::pair<std::uint32_t, double>> similar_items(
    std::uint32_t item_row, const EmbeddingMatrix& embeddings, int k,
    const CandidateSet* restrict_to = nullptr);

struct RecommendRequest {
    std::string campaign;
    std::string user;                       // optional; resolves a stored history
    std::vector<std::string> history;       // item ids, overrides the stored history
    std::optional<std::string> context_item;  // anchor for similar_items
    std::optional<int> k;                   // overrides the campaign default
};

struct ScoredItem {
    std::string id;
    double score = 0.0;
};

struct RecommendResponse {
    std::string campaign;
    std::string variant;
    std::vector<ScoredItem> items;
    std::string reason;  // set when the result is empty or a fallback applied
};

struct EngineArtifacts {
    CompressedCatalog catalog;
    std::vector<Campaign> campaigns;
    // Personalized flow (optional as a group):
    std::optional<ItemCodes> item_codes;
    std::map<std::string, MlpParams> models;  // variant id -> model; "" = default
    // Similar-items flow (optional):
    std::optional<EmbeddingMatrix> embeddings;
    // Histories feed user lookups and the popularity ranking:
    SessionLog history_log;
    std::uint64_t bandit_seed = 0;
};

class Engine {
public:
    explicit Engine(EngineArtifacts artifacts);

    // Filter -> user sketch -> variant -> scores. Cold start falls back to the
    // unfiltered popularity ranking; an exhausted filter returns an empty
    // result with reason "filter_exhausted".
    RecommendResponse recommend(const RecommendRequest& request);

    void feedback(const std::string& campaign, const std::string& variant, int reward);

    const Campaign& campaign(const std::string& name) const;  // throws ContractError
    const CompressedCatalog& catalog() const { return artifacts_.catalog; }
    const std::vector<std::uint32_t>& popularity_order() const { return popularity_; }

private:
    const MlpParams& model_for(const std::string& variant) const;
    std::vector<std::string> resolve_history(const RecommendRequest& request) const;
    RecommendResponse popularity_fallback(const Campaign& c, int k, const std::string& reason);

    EngineArtifacts artifacts_;
    std::unordered_map<std::string, std::uint64_t> item_rows_;       // id -> catalog row
    std::vector<std::optional<std::uint32_t>> row_code_;             // catalog row -> code index
    std::vector<std::optional<std::uint64_t>> row_embedding_;        // catalog row -> embedding row
    std::vector<std::pair<std::uint32_t, CodeSet>> all_candidates_;  // every codable row
    std::unordered_map<std::string, std::vector<std::string>> user_history_;
    std::vector<std::uint32_t> popularity_;  // catalog rows, most popular first
    std::map<std::string, BanditState> bandits_;  // per campaign
    std::mutex bandit_mutex_;
};

}  // namespace fusionrec
