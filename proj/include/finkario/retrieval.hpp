#pragma once

#include "finkario/graphstore.hpp"
#include "finkario/vectorstore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finkario {

struct Anchor {
    std::string stock;
    std::optional<Date> date;
    float score = 0.0f;
};

struct Subgraph {
    std::vector<AttributeTriple> attribute_triples;
    std::vector<EventRecord> event_records;
    std::vector<std::string> provenance; // fine-stage record keys

    size_t triple_count() const {
        return attribute_triples.size() + event_records.size();
    }
    std::string to_json(const std::vector<Anchor>& anchors) const;
};

struct RetrievalOptions {
    size_t k_c = 3;
    size_t k_f = 20;
    int date_window_days = 0; // widen around an anchor's report date
};

std::vector<float> encode_query(const std::string& q, Embedder& embedder);

std::vector<Anchor> coarse_retrieve(const std::vector<float>& h_q,
                                    const VectorIndex& index, size_t k_c);

std::vector<const VectorRecord*> fine_retrieve(const std::vector<float>& h_q,
                                               const std::vector<Anchor>& anchors,
                                               const VectorIndex& index, size_t k_f,
                                               int date_window_days = 0);

Subgraph map_to_subgraph(const std::vector<const VectorRecord*>& fine,
                         const GraphStore& store, int date_window_days = 0);

// End-to-end composition. Throws StalenessError on a build-id mismatch.
std::pair<Subgraph, std::vector<Anchor>> retrieve(const std::string& q,
                                                  const VectorIndex& index,
                                                  const GraphStore& store,
                                                  Embedder& embedder,
                                                  const RetrievalOptions& opts = {});

} // namespace finkario
