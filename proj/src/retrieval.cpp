#include "finkario/retrieval.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace finkario {

std::vector<float> encode_query(const std::string& q, Embedder& embedder) {
    if (q.empty()) throw std::invalid_argument("encode_query: empty query");
    return embedder.embed({{q}, embedder.dimension()})[0];
}

std::vector<Anchor> coarse_retrieve(const std::vector<float>& h_q,
                                    const VectorIndex& index, size_t k_c) {
    if (k_c < 1) throw std::invalid_argument("coarse_retrieve: k_c must be >= 1");
    if (index.size() == 0) return {};
    RecordFilter coarse_filter = [](const VectorRecord& r) {
        return r.level == VectorLevel::Graph ||
               (r.level == VectorLevel::Entity && r.entity_kind == "stock");
    };
    auto hits = mips_search(index, h_q, coarse_filter, index.size());
    std::vector<Anchor> anchors;
    std::set<std::pair<std::string, std::string>> seen; // (stock, date text)
    for (const auto& hit : hits) {
        std::optional<Date> date =
            hit.record->level == VectorLevel::Graph ? std::nullopt : hit.record->date;
        std::pair<std::string, std::string> key{hit.record->stock,
                                                date ? date->to_string() : ""};
        if (!seen.insert(key).second) continue; // keep best score per (stock, date)
        anchors.push_back(Anchor{hit.record->stock, date, hit.score});
        if (anchors.size() == k_c) break;
    }
    return anchors;
}

namespace {

bool matches_anchor(const VectorRecord& r, const std::vector<Anchor>& anchors,
                    int window) {
    for (const auto& a : anchors) {
        if (r.stock != a.stock) continue;
        if (!a.date) return true;
        if (!r.date) continue;
        std::int64_t delta = r.date->serial() - a.date->serial();
        if (delta < 0) delta = -delta;
        if (delta <= window) return true;
    }
    return false;
}

bool in_window(const Date& ts, const std::optional<Date>& center, int window) {
    if (!center) return true;
    std::int64_t delta = ts.serial() - center->serial();
    if (delta < 0) delta = -delta;
    return delta <= window;
}

} // namespace

std::vector<const VectorRecord*> fine_retrieve(const std::vector<float>& h_q,
                                               const std::vector<Anchor>& anchors,
                                               const VectorIndex& index, size_t k_f,
                                               int date_window_days) {
    if (anchors.empty()) throw std::invalid_argument("fine_retrieve: anchors empty");
    if (k_f < 1) throw std::invalid_argument("fine_retrieve: k_f must be >= 1");
    RecordFilter fine_filter = [&](const VectorRecord& r) {
        if (r.level == VectorLevel::Graph) return false;
        return matches_anchor(r, anchors, date_window_days);
    };
    auto hits = mips_search(index, h_q, fine_filter, k_f);
    std::vector<const VectorRecord*> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.record);
    return out;
}

Subgraph map_to_subgraph(const std::vector<const VectorRecord*>& fine,
                         const GraphStore& store, int date_window_days) {
    Subgraph sub;
    std::set<AttributeTriple> attrs;
    std::set<EventRecord> events;
    for (const auto* r : fine) {
        sub.provenance.push_back(r->key);
        StockGraph g;
        try {
            g = store.full_graph(r->stock);
        } catch (const NotFoundError&) {
            continue; // stale record, skipped
        }
        if (r->level == VectorLevel::Entity) {
            auto entity = store.find_entity(r->key);
            if (!entity) continue; // purged entity, skipped
            const std::string& label = entity->label;
            for (const auto& t : g.attribute_triples)
                if (in_window(t.timestamp, r->date, date_window_days) &&
                    (t.head == label || t.tail == label))
                    attrs.insert(t);
            for (const auto& ev : g.event_records)
                if (in_window(ev.timestamp, r->date, date_window_days) &&
                    (ev.subject == label || ev.object == label))
                    events.insert(ev);
        } else if (r->level == VectorLevel::Relation) {
            bool is_event = r->key.rfind("event:", 0) == 0;
            std::string name = r->key.substr(r->key.find(':') + 1);
            if (is_event) {
                for (const auto& ev : g.event_records)
                    if (ev.trigger == name &&
                        in_window(ev.timestamp, r->date, date_window_days))
                        events.insert(ev);
            } else {
                for (const auto& t : g.attribute_triples)
                    if (t.relation == name &&
                        in_window(t.timestamp, r->date, date_window_days))
                        attrs.insert(t);
            }
        }
    }
    auto order_attr = [](const AttributeTriple& a, const AttributeTriple& b) {
        return std::tie(a.timestamp, a.relation, a.head, a.tail) <
               std::tie(b.timestamp, b.relation, b.head, b.tail);
    };
    auto order_event = [](const EventRecord& a, const EventRecord& b) {
        return std::tie(a.timestamp, a.trigger, a.subject, a.object) <
               std::tie(b.timestamp, b.trigger, b.subject, b.object);
    };
    sub.attribute_triples.assign(attrs.begin(), attrs.end());
    std::sort(sub.attribute_triples.begin(), sub.attribute_triples.end(), order_attr);
    sub.event_records.assign(events.begin(), events.end());
    std::sort(sub.event_records.begin(), sub.event_records.end(), order_event);
    return sub;
}

std::pair<Subgraph, std::vector<Anchor>> retrieve(const std::string& q,
                                                  const VectorIndex& index,
                                                  const GraphStore& store,
                                                  Embedder& embedder,
                                                  const RetrievalOptions& opts) {
    if (index.build_id() != store.build_id())
        throw StalenessError("index build id '" + index.build_id() +
                             "' does not match store build id '" + store.build_id() + "'");
    auto h_q = encode_query(q, embedder);
    auto anchors = coarse_retrieve(h_q, index, opts.k_c);
    if (anchors.empty()) return {Subgraph{}, {}};
    auto fine = fine_retrieve(h_q, anchors, index, opts.k_f, opts.date_window_days);
    auto sub = map_to_subgraph(fine, store, opts.date_window_days);
    return {std::move(sub), std::move(anchors)};
}

std::string Subgraph::to_json(const std::vector<Anchor>& anchors) const {
    nlohmann::json j;
    j["anchors"] = nlohmann::json::array();
    for (const auto& a : anchors)
        j["anchors"].push_back(
            {{"stock", a.stock},
             {"date", a.date ? nlohmann::json(a.date->to_string()) : nlohmann::json(nullptr)},
             {"score", a.score}});
    j["triples"] = nlohmann::json::array();
    for (const auto& t : attribute_triples)
        j["triples"].push_back({{"kind", "attribute"},
                                {"head", t.head},
                                {"relation", t.relation},
                                {"tail", t.tail},
                                {"timestamp", t.timestamp.to_string()},
                                {"doc_id", t.doc_id}});
    for (const auto& e : event_records)
        j["triples"].push_back({{"kind", "event"},
                                {"subject", e.subject},
                                {"trigger", e.trigger},
                                {"object", e.object},
                                {"category", e.category},
                                {"timeframe", e.timeframe},
                                {"reasoning", e.reasoning},
                                {"timestamp", e.timestamp.to_string()},
                                {"doc_id", e.doc_id}});
    j["provenance"] = provenance;
    return j.dump(2);
}

} // namespace finkario
