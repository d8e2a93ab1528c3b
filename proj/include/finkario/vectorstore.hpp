#pragma once

#include "finkario/graph.hpp"
#include "finkario/graphstore.hpp"
#include "finkario/providers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace finkario {

enum class VectorLevel { Entity, Relation, Graph };

std::string to_string(VectorLevel level);
VectorLevel vector_level_from_string(const std::string& s);

struct VectorRecord {
    std::string key; // entity_id | relation key | graph id
    VectorLevel level = VectorLevel::Entity;
    std::string stock;         // ticker
    std::optional<Date> date;  // report date (entity/relation records)
    std::string entity_kind;   // entity records only
    std::vector<float> vector; // unit norm
    std::string text;          // the serialization that was embedded

    std::string dedup_key() const;
};

class VectorIndex {
public:
    explicit VectorIndex(int dimension) : dimension_(dimension) {}

    int dimension() const { return dimension_; }
    size_t size() const { return records_.size(); }
    const std::vector<VectorRecord>& records() const { return records_; }

    const std::string& build_id() const { return build_id_; }
    void set_build_id(std::string id) { build_id_ = std::move(id); }

    // Appends; a duplicate (key, stock, date) replaces the older record in place.
    void ingest(std::vector<VectorRecord> records);

    void save(const std::string& path) const; // path + ".meta.jsonl" sidecar
    static VectorIndex load(const std::string& path);

private:
    int dimension_;
    std::string build_id_;
    std::vector<VectorRecord> records_;
};

using RecordFilter = std::function<bool(const VectorRecord&)>;

struct SearchHit {
    const VectorRecord* record;
    float score;
};

// Exact exhaustive MIPS, OpenMP-parallel scoring. Results sorted by
// (score desc, key asc); deterministic regardless of thread count.
std::vector<SearchHit> mips_search(const VectorIndex& index,
                                   const std::vector<float>& query,
                                   const RecordFilter& filter, size_t k);

// Serial reference path, kept for testing and benchmarking.
std::vector<SearchHit> mips_search_serial(const VectorIndex& index,
                                          const std::vector<float>& query,
                                          const RecordFilter& filter, size_t k);

// Deterministic textual serializations fed to the embedder.
std::string serialize_entity(const Entity& e, const StockGraph& g);
std::string serialize_relation(const std::string& name, bool is_event,
                               const std::string& category);
std::string serialize_graph(const StockGraph& g);

// One record per distinct entity, one per distinct relation type used, plus a
// graph-level record (normalized mean of the entity vectors).
std::vector<VectorRecord> encode_graph(const StockGraph& g, Embedder& embedder);

} // namespace finkario
