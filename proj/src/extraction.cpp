#include "finkario/extraction.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace finkario {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string company_label(const RefinedDoc& doc) {
    std::istringstream in(doc.body_text);
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        if (trim(line.substr(0, colon)) == "Company") {
            std::string v = trim(line.substr(colon + 1));
            if (!v.empty()) return v;
        }
    }
    if (doc.ticker) return *doc.ticker;
    return doc.doc_id;
}

} // namespace

ExtractionBatch RuleExtractor::extract(const RefinedDoc& doc, const AttributeSchema& s_a,
                                       const EventSchema& s_e) {
    if (!doc.publish_date)
        throw ExtractionParseError("document has no publish_date: " + doc.doc_id);
    const Date stamp = *doc.publish_date;
    ExtractionBatch batch;
    batch.doc_id = doc.doc_id;
    batch.extractor_id = id();

    const std::string head = company_label(doc);
    std::map<std::string, std::string> attr_values; // latest mention wins
    std::vector<std::string> attr_order;

    static const std::regex event_re(
        R"(^EVENT\[([^\]]*)\]\s*(.*?)\s*->\s*(.*?)\s*->\s*(.*?)\s*(?:::\s*(.*))?$)");

    std::istringstream in(doc.body_text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        std::smatch m;
        if (std::regex_match(line, m, event_re)) {
            std::string category = trim(m[1].str());
            if (!s_e.contains_category(category)) {
                ++batch.warnings;
                continue;
            }
            EventRecord ev;
            ev.subject = trim(m[2].str());
            ev.trigger = trim(m[3].str());
            ev.object = trim(m[4].str());
            ev.reasoning = m[5].matched ? trim(m[5].str()) : "";
            ev.category = category;
            ev.timestamp = stamp;
            ev.doc_id = doc.doc_id;
            if (ev.subject.empty() || ev.trigger.empty()) {
                ++batch.warnings;
                continue;
            }
            batch.event_records.push_back(std::move(ev));
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string rel = trim(line.substr(0, colon));
        std::string val = trim(line.substr(colon + 1));
        if (!s_a.contains(rel) || val.empty()) continue;
        if (!attr_values.count(rel)) attr_order.push_back(rel);
        attr_values[rel] = val;
    }

    for (const auto& rel : attr_order)
        batch.attribute_triples.push_back(
            AttributeTriple{head, rel, attr_values[rel], stamp, doc.doc_id});
    return batch;
}

std::string ChatExtractor::extraction_prompt(const RefinedDoc& doc,
                                             const AttributeSchema& s_a,
                                             const EventSchema& s_e) {
    std::string prompt =
        "Extract structured knowledge from the equity research report below.\n"
        "Reply with a single JSON object with keys \"attributes\" and \"events\".\n"
        "Each attribute: {\"head\", \"relation\", \"tail\"} with relation drawn from:\n";
    for (const auto& r : s_a.relation_names) prompt += "  - " + r + "\n";
    prompt +=
        "Each event: {\"subject\", \"object\", \"trigger\", \"category\", "
        "\"timeframe\", \"reasoning\"}; identify the subject and object, extract "
        "relevant entities such as company names, products and indicators, annotate "
        "the timeframe, and pick a driven category from:\n";
    for (const auto& c : s_e.categories) prompt += "  - " + c.name + "\n";
    prompt += "Report date: " +
              (doc.publish_date ? doc.publish_date->to_string() : std::string("unknown")) +
              "\n\nReport:\n" + doc.body_text + "\n";
    return prompt;
}

ExtractionBatch ChatExtractor::extract(const RefinedDoc& doc, const AttributeSchema& s_a,
                                       const EventSchema& s_e) {
    if (!doc.publish_date)
        throw ExtractionParseError("document has no publish_date: " + doc.doc_id);
    const Date stamp = *doc.publish_date;
    std::string reply = chat_.chat_complete(
        {"You extract financial knowledge graph triples.", extraction_prompt(doc, s_a, s_e),
         1 << 20});
    auto j = nlohmann::json::parse(reply, nullptr, false);
    if (!j.is_object())
        throw ExtractionParseError("extractor reply is not a JSON object", reply);

    ExtractionBatch batch;
    batch.doc_id = doc.doc_id;
    batch.extractor_id = id();
    const std::string fallback_head = company_label(doc);

    std::map<std::string, AttributeTriple> latest; // relation -> triple
    std::vector<std::string> order;
    if (j.contains("attributes") && j["attributes"].is_array()) {
        for (const auto& a : j["attributes"]) {
            if (!a.is_object() || !a.contains("relation") || !a.contains("tail")) {
                ++batch.warnings;
                continue;
            }
            std::string rel = a["relation"].get<std::string>();
            if (!s_a.contains(rel)) {
                ++batch.warnings;
                continue;
            }
            std::string head =
                a.contains("head") ? a["head"].get<std::string>() : fallback_head;
            if (!latest.count(rel)) order.push_back(rel);
            latest[rel] = AttributeTriple{head, rel, a["tail"].get<std::string>(), stamp,
                                          doc.doc_id};
        }
    }
    for (const auto& rel : order) batch.attribute_triples.push_back(latest[rel]);

    if (j.contains("events") && j["events"].is_array()) {
        for (const auto& e : j["events"]) {
            if (!e.is_object() || !e.contains("subject") || !e.contains("trigger") ||
                !e.contains("category")) {
                ++batch.warnings;
                continue;
            }
            std::string category = e["category"].get<std::string>();
            if (!s_e.contains_category(category)) {
                ++batch.warnings;
                continue;
            }
            EventRecord ev;
            ev.subject = e["subject"].get<std::string>();
            ev.object = e.value("object", std::string());
            ev.trigger = e["trigger"].get<std::string>();
            ev.category = category;
            ev.timeframe = e.value("timeframe", std::string());
            ev.reasoning = e.value("reasoning", std::string());
            ev.timestamp = stamp;
            ev.doc_id = doc.doc_id;
            if (ev.subject.empty() || ev.trigger.empty()) {
                ++batch.warnings;
                continue;
            }
            batch.event_records.push_back(std::move(ev));
        }
    }
    return batch;
}

ExtractionBatch extract_document(const RefinedDoc& doc, const AttributeSchema& s_a,
                                 const EventSchema& s_e, Extractor& extractor) {
    return extractor.extract(doc, s_a, s_e);
}

StockGraph build_stock_graph(const std::vector<ExtractionBatch>& batches,
                             const std::string& stock_label, const std::string& ticker) {
    StockGraph g;
    g.stock = Entity{stock_label, EntityKind::Stock};
    g.ticker = ticker;
    for (const auto& batch : batches) {
        for (const auto& t : batch.attribute_triples) {
            if (t.head != stock_label)
                throw MixedStockError("batch " + batch.doc_id + " names stock '" + t.head +
                                      "', expected '" + stock_label + "'");
            g.attribute_triples.push_back(t);
        }
        // Event subjects may be co-mentioned entities (regulators, products).
        for (const auto& e : batch.event_records) g.event_records.push_back(e);
    }
    g.normalize();
    return g;
}

std::vector<std::string> ExtractionBatch::to_json_lines() const {
    std::vector<std::string> out;
    for (const auto& t : attribute_triples) {
        nlohmann::json j = {{"kind", "attribute"}, {"head", t.head},
                            {"relation", t.relation}, {"tail", t.tail},
                            {"timestamp", t.timestamp.to_string()}, {"doc_id", t.doc_id}};
        out.push_back(j.dump());
    }
    for (const auto& e : event_records) {
        nlohmann::json j = {{"kind", "event"},         {"subject", e.subject},
                            {"object", e.object},      {"trigger", e.trigger},
                            {"category", e.category},  {"timeframe", e.timeframe},
                            {"reasoning", e.reasoning},
                            {"timestamp", e.timestamp.to_string()},
                            {"doc_id", e.doc_id}};
        out.push_back(j.dump());
    }
    return out;
}

} // namespace finkario
