#include "finkario/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace finkario {

std::string serialize_subgraph(const Subgraph& g_sub) {
    struct Line {
        Date ts;
        std::string relation;
        std::string head;
        std::string text;
        std::string note;
    };
    std::vector<Line> lines;
    for (const auto& t : g_sub.attribute_triples) {
        std::string text = t.head + " —[" + t.relation + "]→ " + t.tail + " (" +
                           t.timestamp.to_string() + ")";
        lines.push_back({t.timestamp, t.relation, t.head, std::move(text), ""});
    }
    for (const auto& e : g_sub.event_records) {
        std::string extras = e.category;
        if (!e.timeframe.empty()) extras += ", " + e.timeframe;
        std::string text = e.subject + " —[" + e.trigger + "]→ " + e.object + " (" +
                           extras + ", " + e.timestamp.to_string() + ")";
        lines.push_back({e.timestamp, e.trigger, e.subject, std::move(text), e.reasoning});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tie(a.ts, a.relation, a.head, a.text) <
               std::tie(b.ts, b.relation, b.head, b.text);
    });
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += "\n";
        out += l.text;
        if (!l.note.empty()) out += "\n  note: " + l.note;
    }
    return out;
}

std::string analyst_prompt(const std::string& q, const Subgraph& g_sub) {
    return "Question: " + q +
           "\n\nKnowledge:\n" + serialize_subgraph(g_sub) +
           "\n\nPredict the stock movement. Reply with a JSON object "
           "{\"label\": \"Rise\"|\"Fall\", \"confidence\": number, "
           "\"rationale\": string}.\n";
}

namespace {

std::optional<Signal> try_parse_reply(const std::string& reply, const std::string& stock,
                                      const Date& date) {
    auto j = nlohmann::json::parse(reply, nullptr, false);
    if (!j.is_object() || !j.contains("label") || !j.contains("confidence") ||
        !j.contains("rationale"))
        return std::nullopt;
    if (!j["label"].is_string() || !j["confidence"].is_number() ||
        !j["rationale"].is_string())
        return std::nullopt;
    std::string label = j["label"].get<std::string>();
    if (label != "Rise" && label != "Fall") return std::nullopt;
    Signal s;
    s.stock = stock;
    s.signal_date = date;
    s.label = label;
    s.confidence = std::clamp(j["confidence"].get<double>(), 0.0, 1.0);
    s.rationale = j["rationale"].get<std::string>();
    return s;
}

} // namespace

Signal generate_signal(const std::string& q, const Subgraph& g_sub, ChatProvider& chat,
                       const std::string& stock, const Date& date) {
    std::string prompt = analyst_prompt(q, g_sub);
    std::string reply = chat.chat_complete({"You are an equity analyst.", prompt, 8192});
    if (auto s = try_parse_reply(reply, stock, date)) {
        s->source = "chat";
        return *s;
    }
    // one structured re-ask, then give up
    std::string reask = "Your previous reply could not be parsed. " + prompt;
    std::string reply2;
    try {
        reply2 = chat.chat_complete({"You are an equity analyst.", reask, 8192});
    } catch (const ProviderError&) {
        throw SignalParseError("analyst reply unparseable", reply);
    }
    if (auto s = try_parse_reply(reply2, stock, date)) {
        s->source = "chat";
        return *s;
    }
    throw SignalParseError("analyst reply unparseable after re-ask", reply2);
}

Signal mock_analyst(const Subgraph& g_sub, const std::string& stock, const Date& date,
                    const MockAnalystOptions& opts) {
    int positive = 0;
    std::string rationale;
    for (const auto& e : g_sub.event_records) {
        if (!opts.positive_categories.count(e.category)) continue;
        ++positive;
        if (!rationale.empty()) rationale += "; ";
        rationale += e.subject + " " + e.trigger + " " + e.object + " [" + e.category + "]";
    }
    Signal s;
    s.stock = stock;
    s.signal_date = date;
    s.label = positive > 0 ? "Rise" : "Fall";
    s.confidence = std::min(1.0, 0.5 + 0.1 * positive);
    s.rationale = positive > 0 ? rationale : "no positive-category events retrieved";
    s.source = "mock";
    return s;
}

std::string Signal::to_json_line() const {
    nlohmann::json j = {{"stock", stock},
                        {"signal_date", signal_date.to_string()},
                        {"label", label},
                        {"confidence", confidence},
                        {"rationale", rationale},
                        {"source", source}};
    return j.dump();
}

Signal Signal::from_json_line(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    Signal s;
    s.stock = j.at("stock").get<std::string>();
    auto d = Date::parse(j.at("signal_date").get<std::string>());
    if (!d) throw SignalParseError("bad signal_date", line);
    s.signal_date = *d;
    s.label = j.at("label").get<std::string>();
    if (s.label != "Rise" && s.label != "Fall")
        throw SignalParseError("label outside {Rise, Fall}", line);
    s.confidence = j.at("confidence").get<double>();
    if (s.confidence < 0.0 || s.confidence > 1.0)
        throw SignalParseError("confidence outside [0,1]", line);
    s.rationale = j.value("rationale", std::string());
    s.source = j.value("source", std::string());
    return s;
}

} // namespace finkario
