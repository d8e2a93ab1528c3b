#pragma once

#include "finkario/date.hpp"

#include <compare>
#include <string>
#include <vector>

namespace finkario {

enum class EntityKind {
    Stock,
    Institution,
    Industry,
    Exchange,
    Person,
    Product,
    Value,
    EventObject,
    Other,
};

std::string to_string(EntityKind k);
EntityKind entity_kind_from_string(const std::string& s);

struct Entity {
    std::string label;
    EntityKind kind = EntityKind::Other;

    // stable key: lowercase canonical label + "#" + kind
    std::string entity_id() const;
    auto operator<=>(const Entity&) const = default;
};

struct AttributeTriple {
    std::string head;     // company label
    std::string relation; // member of the attribute schema
    std::string tail;     // entity label or value text
    Date timestamp;
    std::string doc_id;

    auto operator<=>(const AttributeTriple&) const = default;
};

struct EventRecord {
    std::string subject;
    std::string object;
    std::string trigger; // relation text r'
    std::string category;
    std::string timeframe;
    std::string reasoning;
    Date timestamp;
    std::string doc_id;

    auto operator<=>(const EventRecord&) const = default;
};

struct StockGraph {
    Entity stock; // kind Stock
    std::string ticker;
    std::vector<AttributeTriple> attribute_triples;
    std::vector<EventRecord> event_records;

    size_t triple_count() const {
        return attribute_triples.size() + event_records.size();
    }
    bool empty() const { return triple_count() == 0; }

    // canonical sorted + deduplicated form
    void normalize();
};

} // namespace finkario
