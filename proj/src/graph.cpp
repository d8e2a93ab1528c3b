#include "finkario/graph.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace finkario {

std::string to_string(EntityKind k) {
    switch (k) {
        case EntityKind::Stock: return "stock";
        case EntityKind::Institution: return "institution";
        case EntityKind::Industry: return "industry";
        case EntityKind::Exchange: return "exchange";
        case EntityKind::Person: return "person";
        case EntityKind::Product: return "product";
        case EntityKind::Value: return "value";
        case EntityKind::EventObject: return "event-object";
        case EntityKind::Other: return "other";
    }
    return "other";
}

EntityKind entity_kind_from_string(const std::string& s) {
    if (s == "stock") return EntityKind::Stock;
    if (s == "institution") return EntityKind::Institution;
    if (s == "industry") return EntityKind::Industry;
    if (s == "exchange") return EntityKind::Exchange;
    if (s == "person") return EntityKind::Person;
    if (s == "product") return EntityKind::Product;
    if (s == "value") return EntityKind::Value;
    if (s == "event-object") return EntityKind::EventObject;
    if (s == "other") return EntityKind::Other;
    throw std::invalid_argument("unknown entity kind: " + s);
}

std::string Entity::entity_id() const {
    std::string key = label;
    for (char& c : key)
        if (c >= 'A' && c <= 'Z') c += 32;
    return key + "#" + to_string(kind);
}

void StockGraph::normalize() {
    // Dedup keys ignore doc_id: the same fact reported twice is one triple.
    std::sort(attribute_triples.begin(), attribute_triples.end());
    attribute_triples.erase(
        std::unique(attribute_triples.begin(), attribute_triples.end(),
                    [](const AttributeTriple& a, const AttributeTriple& b) {
                        return a.head == b.head && a.relation == b.relation &&
                               a.tail == b.tail && a.timestamp == b.timestamp;
                    }),
        attribute_triples.end());
    std::sort(event_records.begin(), event_records.end());
    event_records.erase(
        std::unique(event_records.begin(), event_records.end(),
                    [](const EventRecord& a, const EventRecord& b) {
                        return a.subject == b.subject && a.object == b.object &&
                               a.trigger == b.trigger && a.category == b.category &&
                               a.timestamp == b.timestamp;
                    }),
        event_records.end());
}

} // namespace finkario
