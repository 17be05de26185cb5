#pragma once

// Aggregation of impression/click event logs into per-campaign and per-day
// CTR reports.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "fusionrec/common.hpp"

namespace fusionrec {

struct CampaignStats {
    std::uint64_t impressions = 0;
    std::uint64_t clicks = 0;
    double ctr() const {
        return impressions == 0 ? 0.0 : static_cast<double>(clicks) / impressions;
    }
};

struct AnalyticsAggregate {
    std::map<std::string, CampaignStats> per_campaign;
    std::map<std::pair<std::string, std::string>, CampaignStats> per_day;  // (campaign, day)
    std::uint64_t malformed_rows = 0;
};

// CSV rows `timestamp,campaign,event` with event in {impression, click}; the
// timestamp is either epoch seconds or an ISO date(-time) whose first ten
// characters are YYYY-MM-DD. An optional header row is ignored. Malformed rows
// are skipped and counted. Clicks count even without a matching impression.
AnalyticsAggregate aggregate_events(std::istream& in);

// CSV report: campaign totals (empty day column) followed by per-day rows.
void write_report_csv(const AnalyticsAggregate& agg, std::ostream& out);

// Epoch seconds -> "YYYY-MM-DD" (UTC).
std::string day_from_epoch(std::int64_t epoch_seconds);

}  // namespace fusionrec
