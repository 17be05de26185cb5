#include "fusionrec/analytics.hpp"

#include <charconv>
#include <cstdio>
#include <vector>

namespace fusionrec {

std::string day_from_epoch(std::int64_t epoch_seconds) {
    // Civil-from-days (Hinnant's algorithm); avoids the C locale machinery.
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) --days;
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const std::int64_t doe = days - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t year = m <= 2 ? y + 1 : y;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld", static_cast<long long>(year),
                  static_cast<long long>(m), static_cast<long long>(d));
    return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool looks_like_iso_date(const std::string& ts) {
    return ts.size() >= 10 && ts[4] == '-' && ts[7] == '-';
}

}  // namespace

AnalyticsAggregate aggregate_events(std::istream& in) {
    AnalyticsAggregate agg;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (first) {
            first = false;
            if (fields.size() >= 1 && fields[0] == "timestamp") continue;
        }
        if (fields.size() != 3) {
            ++agg.malformed_rows;
            continue;
        }
        const std::string& ts = fields[0];
        const std::string& campaign = fields[1];
        const std::string& event = fields[2];
        if (campaign.empty() || (event != "impression" && event != "click")) {
            ++agg.malformed_rows;
            continue;
        }
        std::string day;
        if (looks_like_iso_date(ts)) {
            day = ts.substr(0, 10);
        } else {
            std::int64_t epoch = 0;
            auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), epoch);
            if (ec != std::errc() || ptr != ts.data() + ts.size()) {
                ++agg.malformed_rows;
                continue;
            }
            day = day_from_epoch(epoch);
        }
        CampaignStats& total = agg.per_campaign[campaign];
        CampaignStats& daily = agg.per_day[{campaign, day}];
        if (event == "impression") {
            ++total.impressions;
            ++daily.impressions;
        } else {
            ++total.clicks;
            ++daily.clicks;
        }
    }
    if (in.bad()) throw IoError("failed reading event stream");
    return agg;
}

void write_report_csv(const AnalyticsAggregate& agg, std::ostream& out) {
    out << "campaign,day,impressions,clicks,ctr\n";
    char buf[32];
    auto emit = [&](const std::string& campaign, const std::string& day,
                    const CampaignStats& s) {
        std::snprintf(buf, sizeof buf, "%.6g", s.ctr());
        out << campaign << ',' << day << ',' << s.impressions << ',' << s.clicks << ',' << buf
            << '\n';
    };
    for (const auto& [campaign, stats] : agg.per_campaign) emit(campaign, "", stats);
    for (const auto& [key, stats] : agg.per_day) emit(key.first, key.second, stats);
    if (!out) throw IoError("failed writing report");
}

}  // namespace fusionrec
