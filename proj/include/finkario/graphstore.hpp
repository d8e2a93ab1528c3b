#pragma once

#include "finkario/graph.hpp"
#include "finkario/errors.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace finkario {

struct GraphStats {
    size_t entity_count = 0;
    size_t relation_type_count = 0; // attribute names + event categories
    size_t triple_count = 0;
};

struct NeighborRow {
    std::string relation;
    bool is_event = false;
    std::string category; // event rows only
    Entity neighbor;
    bool outgoing = true;
    Date timestamp;

    bool operator==(const NeighborRow&) const = default;
};

// Dual timestamped graph store. In-memory, persisted as one JSONL file per
// stock under <root>/stocks/ plus <root>/entities.jsonl.
class GraphStore {
public:
    GraphStore() = default;

    void upsert(const StockGraph& graph);

    StockGraph snapshot(const std::string& ticker, const Date& from, const Date& to) const;
    StockGraph full_graph(const std::string& ticker) const;

    std::vector<NeighborRow> neighbors(const std::string& entity_id) const;
    // neighbors restricted to one stock and an optional exact date
    std::vector<NeighborRow> neighbors(const std::string& entity_id,
                                       const std::string& ticker,
                                       std::optional<Date> date) const;

    GraphStats stats() const;

    std::vector<std::string> tickers() const;
    const std::map<std::string, Entity>& entities() const { return entities_; }
    std::optional<Entity> find_entity(const std::string& entity_id) const;

    const std::string& build_id() const { return build_id_; }
    void set_build_id(std::string id) { build_id_ = std::move(id); }

    void save(const std::string& root) const;
    static GraphStore load(const std::string& root);

    // Entity extraction used both here and by the vector encoder: the stock
    // node plus every tail/subject/object, with coarse kind tags.
    static std::vector<Entity> graph_entities(const StockGraph& g);

private:
    std::map<std::string, StockGraph> graphs_; // by ticker
    std::map<std::string, Entity> entities_;   // by entity_id
    std::string build_id_;

    void register_entities(const StockGraph& g);
};

} // namespace finkario
