#include "finkario/graphstore.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace finkario {

namespace {

EntityKind kind_for_attribute_tail(const std::string& relation) {
    if (relation == "Primary Industry") return EntityKind::Industry;
    if (relation == "Primary Exchange") return EntityKind::Exchange;
    if (relation == "Research Institution") return EntityKind::Institution;
    if (relation == "Key Products") return EntityKind::Product;
    if (relation == "Major Shareholders") return EntityKind::Other;
    return EntityKind::Value;
}

Entity tail_entity(const AttributeTriple& t) {
    return Entity{t.tail, kind_for_attribute_tail(t.relation)};
}

Entity event_entity(const std::string& label, const std::string& stock_label) {
    if (label == stock_label) return Entity{label, EntityKind::Stock};
    return Entity{label, EntityKind::EventObject};
}

} // namespace

std::vector<Entity> GraphStore::graph_entities(const StockGraph& g) {
    std::set<std::string> seen;
    std::vector<Entity> out;
    auto add = [&](const Entity& e) {
        if (e.label.empty()) return;
        if (seen.insert(e.entity_id()).second) out.push_back(e);
    };
    add(g.stock);
    for (const auto& t : g.attribute_triples) {
        add(Entity{t.head, EntityKind::Stock});
        add(tail_entity(t));
    }
    for (const auto& e : g.event_records) {
        add(event_entity(e.subject, g.stock.label));
        add(event_entity(e.object, g.stock.label));
    }
    std::sort(out.begin(), out.end(),
              [](const Entity& a, const Entity& b) { return a.entity_id() < b.entity_id(); });
    return out;
}

void GraphStore::register_entities(const StockGraph& g) {
    for (const auto& e : graph_entities(g)) entities_.emplace(e.entity_id(), e);
}

void GraphStore::upsert(const StockGraph& graph) {
    auto it = graphs_.find(graph.ticker);
    if (it == graphs_.end()) {
        StockGraph g = graph;
        g.normalize();
        graphs_.emplace(graph.ticker, std::move(g));
    } else {
        StockGraph& g = it->second;
        g.attribute_triples.insert(g.attribute_triples.end(),
                                   graph.attribute_triples.begin(),
                                   graph.attribute_triples.end());
        g.event_records.insert(g.event_records.end(), graph.event_records.begin(),
                               graph.event_records.end());
        g.normalize();
    }
    register_entities(graphs_.at(graph.ticker));
}

StockGraph GraphStore::full_graph(const std::string& ticker) const {
    auto it = graphs_.find(ticker);
    if (it == graphs_.end()) throw NotFoundError("unknown stock: " + ticker);
    return it->second;
}

StockGraph GraphStore::snapshot(const std::string& ticker, const Date& from,
                                const Date& to) const {
    StockGraph full = full_graph(ticker);
    StockGraph out;
    out.stock = full.stock;
    out.ticker = full.ticker;
    for (const auto& t : full.attribute_triples)
        if (from <= t.timestamp && t.timestamp <= to) out.attribute_triples.push_back(t);
    for (const auto& e : full.event_records)
        if (from <= e.timestamp && e.timestamp <= to) out.event_records.push_back(e);
    return out;
}

std::vector<NeighborRow> GraphStore::neighbors(const std::string& entity_id) const {
    return neighbors(entity_id, "", std::nullopt);
}

std::vector<NeighborRow> GraphStore::neighbors(const std::string& entity_id,
                                               const std::string& ticker,
                                               std::optional<Date> date) const {
    if (!entities_.count(entity_id)) throw NotFoundError("unknown entity: " + entity_id);
    std::vector<NeighborRow> rows;
    for (const auto& [tk, g] : graphs_) {
        if (!ticker.empty() && tk != ticker) continue;
        for (const auto& t : g.attribute_triples) {
            if (date && t.timestamp != *date) continue;
            Entity head{t.head, EntityKind::Stock};
            Entity tail = tail_entity(t);
            if (head.entity_id() == entity_id)
                rows.push_back({t.relation, false, "", tail, true, t.timestamp});
            else if (tail.entity_id() == entity_id)
                rows.push_back({t.relation, false, "", head, false, t.timestamp});
        }
        for (const auto& e : g.event_records) {
            if (date && e.timestamp != *date) continue;
            Entity subj = event_entity(e.subject, g.stock.label);
            Entity obj = event_entity(e.object, g.stock.label);
            if (subj.entity_id() == entity_id && !e.object.empty())
                rows.push_back({e.trigger, true, e.category, obj, true, e.timestamp});
            else if (obj.entity_id() == entity_id)
                rows.push_back({e.trigger, true, e.category, subj, false, e.timestamp});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const NeighborRow& a, const NeighborRow& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.relation != b.relation) return a.relation < b.relation;
        return a.neighbor.entity_id() < b.neighbor.entity_id();
    });
    return rows;
}

GraphStats GraphStore::stats() const {
    GraphStats s;
    s.entity_count = entities_.size();
    std::set<std::string> relation_types;
    for (const auto& [tk, g] : graphs_) {
        for (const auto& t : g.attribute_triples) relation_types.insert("attr:" + t.relation);
        for (const auto& e : g.event_records) relation_types.insert("event:" + e.category);
        s.triple_count += g.triple_count();
    }
    s.relation_type_count = relation_types.size();
    return s;
}

std::vector<std::string> GraphStore::tickers() const {
    std::vector<std::string> out;
    for (const auto& [tk, g] : graphs_) out.push_back(tk);
    return out;
}

std::optional<Entity> GraphStore::find_entity(const std::string& entity_id) const {
    auto it = entities_.find(entity_id);
    if (it == entities_.end()) return std::nullopt;
    return it->second;
}

void GraphStore::save(const std::string& root) const {
    std::error_code ec;
    fs::create_directories(fs::path(root) / "stocks", ec);
    if (ec) throw IoError("cannot create store root: " + root);

    auto atomic_write = [](const fs::path& path, const std::string& content) {
        fs::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + path.string());
            out << content;
        }
        fs::rename(tmp, path);
    };

    {
        std::ostringstream out;
        for (const auto& [id, e] : entities_) {
            nlohmann::json j = {{"id", id}, {"label", e.label}, {"kind", to_string(e.kind)}};
            out << j.dump() << "\n";
        }
        atomic_write(fs::path(root) / "entities.jsonl", out.str());
    }
    {
        nlohmann::json meta = {{"build_id", build_id_}};
        atomic_write(fs::path(root) / "meta.json", meta.dump(2) + "\n");
    }
    for (const auto& [tk, g] : graphs_) {
        std::ostringstream out;
        nlohmann::json header = {{"ticker", tk}, {"stock_label", g.stock.label}};
        out << header.dump() << "\n";
        for (const auto& t : g.attribute_triples) {
            nlohmann::json j = {{"kind", "attribute"},
                                {"head", t.head},
                                {"relation", t.relation},
                                {"tail", t.tail},
                                {"category", nullptr},
                                {"timeframe", nullptr},
                                {"reasoning", nullptr},
                                {"timestamp", t.timestamp.to_string()},
                                {"doc_id", t.doc_id}};
            out << j.dump() << "\n";
        }
        for (const auto& e : g.event_records) {
            nlohmann::json j = {{"kind", "event"},
                                {"head", e.subject},
                                {"relation", e.trigger},
                                {"tail", e.object},
                                {"category", e.category},
                                {"timeframe", e.timeframe},
                                {"reasoning", e.reasoning},
                                {"timestamp", e.timestamp.to_string()},
                                {"doc_id", e.doc_id}};
            out << j.dump() << "\n";
        }
        atomic_write(fs::path(root) / "stocks" / (tk + ".jsonl"), out.str());
    }
}

GraphStore GraphStore::load(const std::string& root) {
    GraphStore store;
    fs::path base(root);
    if (!fs::is_directory(base)) throw IoError("no store at " + root);
    {
        fs::path meta_path = base / "meta.json";
        if (fs::exists(meta_path)) {
            std::ifstream in(meta_path);
            nlohmann::json meta = nlohmann::json::parse(in);
            store.build_id_ = meta.value("build_id", std::string());
        }
    }
    std::vector<fs::path> stock_files;
    if (fs::is_directory(base / "stocks"))
        for (const auto& entry : fs::directory_iterator(base / "stocks"))
            if (entry.path().extension() == ".jsonl") stock_files.push_back(entry.path());
    std::sort(stock_files.begin(), stock_files.end());
    for (const auto& path : stock_files) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read " + path.string());
        std::string line;
        if (!std::getline(in, line)) continue;
        auto header = nlohmann::json::parse(line);
        StockGraph g;
        g.ticker = header.at("ticker").get<std::string>();
        g.stock = Entity{header.at("stock_label").get<std::string>(), EntityKind::Stock};
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            Date stamp = *Date::parse(j.at("timestamp").get<std::string>());
            if (j.at("kind") == "attribute") {
                g.attribute_triples.push_back(
                    AttributeTriple{j.at("head"), j.at("relation"), j.at("tail"), stamp,
                                    j.at("doc_id")});
            } else {
                g.event_records.push_back(EventRecord{
                    j.at("head"), j.at("tail"), j.at("relation"), j.at("category"),
                    j.at("timeframe").is_null() ? "" : j.at("timeframe").get<std::string>(),
                    j.at("reasoning").is_null() ? "" : j.at("reasoning").get<std::string>(),
                    stamp, j.at("doc_id")});
            }
        }
        store.upsert(g);
    }
    return store;
}

} // namespace finkario
