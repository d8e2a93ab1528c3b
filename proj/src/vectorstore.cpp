#include "finkario/vectorstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace finkario {

namespace {

double l2_norm(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

std::string tidy(std::string s) {
    // collapse double spaces, trim trailing whitespace
    std::string out;
    for (char c : s) {
        if (c == ' ' && !out.empty() && out.back() == ' ') continue;
        out += c;
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == '\n')) out.pop_back();
    return out;
}

} // namespace

std::string to_string(VectorLevel level) {
    switch (level) {
        case VectorLevel::Entity: return "entity";
        case VectorLevel::Relation: return "relation";
        case VectorLevel::Graph: return "graph";
    }
    return "entity";
}

VectorLevel vector_level_from_string(const std::string& s) {
    if (s == "entity") return VectorLevel::Entity;
    if (s == "relation") return VectorLevel::Relation;
    if (s == "graph") return VectorLevel::Graph;
    throw std::invalid_argument("unknown vector level: " + s);
}

std::string VectorRecord::dedup_key() const {
    return key + "\x1f" + stock + "\x1f" + (date ? date->to_string() : "");
}

void VectorIndex::ingest(std::vector<VectorRecord> records) {
    std::map<std::string, size_t> positions;
    for (size_t i = 0; i < records_.size(); ++i)
        positions[records_[i].dedup_key()] = i;
    for (auto& r : records) {
        if (static_cast<int>(r.vector.size()) != dimension_)
            throw std::invalid_argument("ingest: dimension mismatch for key " + r.key);
        auto it = positions.find(r.dedup_key());
        if (it != positions.end()) {
            records_[it->second] = std::move(r);
        } else {
            positions[r.dedup_key()] = records_.size();
            records_.push_back(std::move(r));
        }
    }
}

std::string serialize_entity(const Entity& e, const StockGraph& g) {
    std::set<std::string> relations;
    std::set<std::string> neighbor_labels;
    const std::string& label = e.label;
    for (const auto& t : g.attribute_triples) {
        if (t.head == label) {
            relations.insert(t.relation);
            neighbor_labels.insert(t.tail);
        } else if (t.tail == label) {
            relations.insert(t.relation);
            neighbor_labels.insert(t.head);
        }
    }
    for (const auto& ev : g.event_records) {
        if (ev.subject == label) {
            relations.insert(ev.trigger);
            if (!ev.object.empty()) neighbor_labels.insert(ev.object);
        } else if (ev.object == label) {
            relations.insert(ev.trigger);
            neighbor_labels.insert(ev.subject);
        }
    }
    auto join = [](const std::set<std::string>& items) {
        std::string out;
        for (const auto& s : items) {
            if (!out.empty()) out += ", ";
            out += s;
        }
        return out;
    };
    return tidy(label + " | " + to_string(e.kind) + " | " + join(relations) + " | " +
                join(neighbor_labels));
}

std::string serialize_relation(const std::string& name, bool is_event,
                               const std::string& category) {
    return tidy(name + " | " + (is_event ? "event-trigger" : "attribute") + " | " +
                category);
}

std::string serialize_graph(const StockGraph& g) {
    std::string out;
    for (const auto& e : GraphStore::graph_entities(g)) {
        if (!out.empty()) out += "\n";
        out += serialize_entity(e, g);
    }
    return out;
}

std::vector<VectorRecord> encode_graph(const StockGraph& g, Embedder& embedder) {
    if (g.empty()) throw std::invalid_argument("encode_graph: empty graph");
    const int dim = embedder.dimension();

    auto entities = GraphStore::graph_entities(g);

    // latest incident timestamp per entity label
    auto entity_latest = [&](const std::string& label) -> std::optional<Date> {
        std::optional<Date> latest;
        auto touch = [&](const Date& d) {
            if (!latest || *latest < d) latest = d;
        };
        for (const auto& t : g.attribute_triples)
            if (t.head == label || t.tail == label) touch(t.timestamp);
        for (const auto& ev : g.event_records)
            if (ev.subject == label || ev.object == label) touch(ev.timestamp);
        return latest;
    };

    struct RelInfo {
        bool is_event;
        std::string category;
        Date date;
    };
    std::map<std::string, RelInfo> relations;
    auto touch_rel = [&](const std::string& name, bool is_event, const std::string& cat,
                         const Date& d) {
        auto [it, inserted] = relations.emplace(name, RelInfo{is_event, cat, d});
        if (!inserted && it->second.date < d) it->second.date = d;
    };
    for (const auto& t : g.attribute_triples) touch_rel(t.relation, false, "", t.timestamp);
    for (const auto& ev : g.event_records)
        touch_rel(ev.trigger, true, ev.category, ev.timestamp);

    std::vector<VectorRecord> out;
    std::vector<std::string> texts;
    for (const auto& e : entities) texts.push_back(serialize_entity(e, g));
    auto vectors = embedder.embed({texts, dim});

    std::vector<double> acc(dim, 0.0);
    for (size_t i = 0; i < entities.size(); ++i) {
        VectorRecord r;
        r.key = entities[i].entity_id();
        r.level = VectorLevel::Entity;
        r.stock = g.ticker;
        r.entity_kind = to_string(entities[i].kind);
        r.date = entity_latest(entities[i].label);
        r.vector = vectors[i];
        r.text = texts[i];
        for (int d = 0; d < dim; ++d) acc[d] += r.vector[d];
        out.push_back(std::move(r));
    }
    for (const auto& [name, info] : relations) {
        VectorRecord r;
        r.key = std::string(info.is_event ? "event:" : "attr:") + name;
        r.level = VectorLevel::Relation;
        r.stock = g.ticker;
        r.date = info.date;
        r.text = serialize_relation(name, info.is_event, info.category);
        r.vector = embedder.embed({{r.text}, dim})[0];
        out.push_back(std::move(r));
    }

    VectorRecord graph_rec;
    graph_rec.key = "graph:" + g.ticker;
    graph_rec.level = VectorLevel::Graph;
    graph_rec.stock = g.ticker;
    graph_rec.text = serialize_graph(g);
    double norm = 0.0;
    for (int d = 0; d < dim; ++d) norm += acc[d] * acc[d];
    norm = std::sqrt(norm);
    graph_rec.vector.resize(dim);
    if (norm == 0.0) norm = 1.0;
    for (int d = 0; d < dim; ++d)
        graph_rec.vector[d] = static_cast<float>(acc[d] / norm);
    out.push_back(std::move(graph_rec));

    // re-normalize everything before ingestion
    for (auto& r : out) {
        double n = l2_norm(r.vector);
        if (n > 0.0)
            for (auto& x : r.vector) x = static_cast<float>(x / n);
    }
    return out;
}

namespace {

bool unit_norm(const std::vector<float>& v) { return std::abs(l2_norm(v) - 1.0) <= 1e-6; }

std::vector<SearchHit> finish(std::vector<SearchHit> hits, size_t k) {
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.record->key != b.record->key) return a.record->key < b.record->key;
        return a.record->dedup_key() < b.record->dedup_key();
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

} // namespace

std::vector<SearchHit> mips_search(const VectorIndex& index,
                                   const std::vector<float>& query,
                                   const RecordFilter& filter, size_t k) {
    if (static_cast<int>(query.size()) != index.dimension())
        throw std::invalid_argument("mips_search: query dimension mismatch");
    if (!unit_norm(query)) throw std::invalid_argument("mips_search: query not unit-norm");
    if (k < 1) throw std::invalid_argument("mips_search: k must be >= 1");

    const auto& records = index.records();
    std::vector<const VectorRecord*> candidates;
    candidates.reserve(records.size());
    for (const auto& r : records)
        if (!filter || filter(r)) candidates.push_back(&r);

    std::vector<SearchHit> hits(candidates.size());
    const std::int64_t n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const VectorRecord* r = candidates[i];
        double dot = 0.0;
        for (size_t d = 0; d < query.size(); ++d)
            dot += static_cast<double>(query[d]) * r->vector[d];
        hits[i] = SearchHit{r, static_cast<float>(dot)};
    }
    return finish(std::move(hits), k);
}

std::vector<SearchHit> mips_search_serial(const VectorIndex& index,
                                          const std::vector<float>& query,
                                          const RecordFilter& filter, size_t k) {
    if (static_cast<int>(query.size()) != index.dimension())
        throw std::invalid_argument("mips_search: query dimension mismatch");
    if (!unit_norm(query)) throw std::invalid_argument("mips_search: query not unit-norm");
    if (k < 1) throw std::invalid_argument("mips_search: k must be >= 1");

    std::vector<SearchHit> hits;
    for (const auto& r : index.records()) {
        if (filter && !filter(r)) continue;
        double dot = 0.0;
        for (size_t d = 0; d < query.size(); ++d)
            dot += static_cast<double>(query[d]) * r.vector[d];
        hits.push_back(SearchHit{&r, static_cast<float>(dot)});
    }
    return finish(std::move(hits), k);
}

void VectorIndex::save(const std::string& path) const {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write index: " + path);
        const char magic[4] = {'F', 'K', 'V', 'X'};
        out.write(magic, 4);
        std::uint32_t dim = static_cast<std::uint32_t>(dimension_);
        std::uint64_t count = records_.size();
        out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
        out.write(reinterpret_cast<const char*>(&count), sizeof(count));
        for (const auto& r : records_)
            out.write(reinterpret_cast<const char*>(r.vector.data()),
                      static_cast<std::streamsize>(r.vector.size() * sizeof(float)));
    }
    std::ofstream meta(path + ".meta.jsonl", std::ios::binary | std::ios::trunc);
    if (!meta) throw IoError("cannot write index sidecar: " + path);
    nlohmann::json header = {{"build_id", build_id_}, {"dimension", dimension_}};
    meta << header.dump() << "\n";
    for (const auto& r : records_) {
        nlohmann::json j = {{"key", r.key},
                            {"level", to_string(r.level)},
                            {"stock", r.stock},
                            {"date", r.date ? nlohmann::json(r.date->to_string())
                                            : nlohmann::json(nullptr)},
                            {"entity_kind", r.entity_kind},
                            {"text", r.text}};
        meta << j.dump() << "\n";
    }
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read index: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "FKVX", 4) != 0) throw ParseError("bad index magic");
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    VectorIndex index(static_cast<int>(dim));

    std::ifstream meta(path + ".meta.jsonl");
    if (!meta) throw IoError("cannot read index sidecar: " + path);
    std::string line;
    if (!std::getline(meta, line)) throw ParseError("index sidecar empty");
    auto header = nlohmann::json::parse(line);
    index.build_id_ = header.value("build_id", std::string());

    std::vector<VectorRecord> records;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!std::getline(meta, line)) throw ParseError("index sidecar truncated");
        auto j = nlohmann::json::parse(line);
        VectorRecord r;
        r.key = j.at("key").get<std::string>();
        r.level = vector_level_from_string(j.at("level").get<std::string>());
        r.stock = j.at("stock").get<std::string>();
        if (!j.at("date").is_null()) r.date = Date::parse(j["date"].get<std::string>());
        r.entity_kind = j.value("entity_kind", std::string());
        r.text = j.at("text").get<std::string>();
        r.vector.resize(dim);
        in.read(reinterpret_cast<char*>(r.vector.data()),
                static_cast<std::streamsize>(dim * sizeof(float)));
        records.push_back(std::move(r));
    }
    if (!in) throw ParseError("index vector file truncated");
    index.ingest(std::move(records));
    return index;
}

} // namespace finkario
