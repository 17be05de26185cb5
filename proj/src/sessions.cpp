#include "fusionrec/sessions.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

namespace fusionrec {

SessionLog load_sessions(std::istream& in) {
    struct Row {
        std::string item;
        std::int64_t timestamp;
        std::size_t order;
    };
    std::vector<std::string> session_order;
    std::unordered_map<std::string, std::vector<Row>> by_session;

    SessionLog log;
    std::string line;
    std::size_t order = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            ++log.malformed_lines;
            continue;
        }
        const std::string session = line.substr(0, t1);
        const std::string item = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string ts = line.substr(t2 + 1);
        std::int64_t timestamp = 0;
        auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), timestamp);
        if (session.empty() || item.empty() || ec != std::errc() || ptr != ts.data() + ts.size()) {
            ++log.malformed_lines;
            continue;
        }
        auto [it, inserted] = by_session.try_emplace(session);
        if (inserted) session_order.push_back(session);
        it->second.push_back({item, timestamp, order++});
    }
    if (in.bad()) throw IoError("failed reading session stream");

    for (const auto& sid : session_order) {
        auto& rows = by_session[sid];
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.order < b.order;
        });
        Session s;
        s.id = sid;
        for (auto& r : rows) s.items.push_back(std::move(r.item));
        log.sessions.push_back(std::move(s));
    }
    return log;
}

std::vector<double> history_input(const std::vector<CodeSet>& codes,
                                  const SketchLayout& layout) {
    const Sketch counts = sketch_of_items(codes, std::vector<double>(codes.size(), 1.0), layout);
    return normalize_rows(counts).cells;
}

std::vector<TrainingExample> examples_from_sessions(const SessionLog& log,
                                                    const ItemCodes& item_codes) {
    std::unordered_map<std::string, std::size_t> label_row;
    for (std::size_t i = 0; i < item_codes.labels.size(); ++i)
        label_row.emplace(item_codes.labels[i], i);

    std::vector<TrainingExample> examples;
    for (const auto& session : log.sessions) {
        std::vector<CodeSet> resolved;
        for (const auto& item : session.items) {
            auto it = label_row.find(item);
            if (it != label_row.end()) resolved.push_back(item_codes.codes[it->second]);
        }
        if (resolved.size() < 2) continue;
        const std::size_t split = (resolved.size() + 1) / 2;
        std::vector<CodeSet> history(resolved.begin(), resolved.begin() + split);
        std::vector<CodeSet> targets(resolved.begin() + split, resolved.end());

        TrainingExample ex;
        ex.input = history_input(history, item_codes.layout);
        const Sketch target_counts = sketch_of_items(
            targets, std::vector<double>(targets.size(), 1.0), item_codes.layout);
        ex.target = normalize_rows(target_counts);
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace fusionrec
