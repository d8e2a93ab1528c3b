#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "finkario/vectorstore.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

namespace fs = std::filesystem;
using namespace finkario;

namespace {

double l2(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += double(x) * x;
    return std::sqrt(s);
}

StockGraph byd_graph() {
    StockGraph g;
    g.stock = {"BYD", EntityKind::Stock};
    g.ticker = "002594.SZ";
    g.attribute_triples = {
        {"BYD", "Primary Industry", "Automobiles", {2024, 9, 2}, "d1"},
        {"BYD", "Target Price", "350 CNY", {2024, 9, 9}, "d2"},
    };
    return g;
}

std::vector<float> random_unit(std::mt19937& rng, int dim) {
    std::normal_distribution<float> dist;
    std::vector<float> v(dim);
    double n = 0.0;
    for (auto& x : v) {
        x = dist(rng);
        n += double(x) * x;
    }
    n = std::sqrt(n);
    for (auto& x : v) x = float(x / n);
    return v;
}

VectorIndex random_index(std::mt19937& rng, size_t n, int dim) {
    VectorIndex index(dim);
    std::vector<VectorRecord> records(n);
    for (size_t i = 0; i < n; ++i) {
        records[i].key = "r" + std::to_string(i);
        records[i].stock = "S" + std::to_string(i % 7);
        records[i].vector = random_unit(rng, dim);
    }
    index.ingest(std::move(records));
    return index;
}

} // namespace

TEST_CASE("serialize_entity: isolated stock, determinism, permutation invariance") {
    StockGraph lone;
    lone.stock = {"BYD", EntityKind::Stock};
    lone.ticker = "002594.SZ";
    CHECK(serialize_entity(lone.stock, lone) == "BYD | stock | |");

    auto g = byd_graph();
    auto a = serialize_entity(g.stock, g);
    CHECK(a == serialize_entity(g.stock, g));

    StockGraph swapped = g;
    std::swap(swapped.attribute_triples[0], swapped.attribute_triples[1]);
    CHECK(serialize_entity(swapped.stock, swapped) == a);
    CHECK(a == "BYD | stock | Primary Industry, Target Price | 350 CNY, Automobiles");
}

TEST_CASE("serialize_relation") {
    CHECK(serialize_relation("Target Price", false, "") == "Target Price | attribute |");
    CHECK(serialize_relation("Overseas expansion", true, "Strategic Action") ==
          "Overseas expansion | event-trigger | Strategic Action");
}

TEST_CASE("encode_graph: record accounting n entities + m relation types + 1") {
    HashingEmbedder emb(64);
    auto g = byd_graph(); // 3 entities, 2 relation types
    auto records = encode_graph(g, emb);
    CHECK(records.size() == 3 + 2 + 1);
    int graphs = 0, rels = 0, ents = 0;
    for (const auto& r : records) {
        CHECK(l2(r.vector) == doctest::Approx(1.0).epsilon(1e-6));
        if (r.level == VectorLevel::Graph) {
            ++graphs;
            CHECK(r.stock == "002594.SZ");
            CHECK_FALSE(r.date.has_value());
        }
        if (r.level == VectorLevel::Relation) ++rels;
        if (r.level == VectorLevel::Entity) ++ents;
    }
    CHECK(graphs == 1);
    CHECK(rels == 2);
    CHECK(ents == 3);
}

TEST_CASE("encode_graph: single-entity graph vector equals the entity vector") {
    HashingEmbedder emb(64);
    StockGraph g;
    g.stock = {"BYD", EntityKind::Stock};
    g.ticker = "002594.SZ";
    g.event_records = {{"BYD", "", "Sales", "Demand", "", "", {2024, 9, 2}, "d1"}};
    auto records = encode_graph(g, emb);
    const VectorRecord *ent = nullptr, *graph = nullptr;
    for (const auto& r : records) {
        if (r.level == VectorLevel::Entity) ent = &r;
        if (r.level == VectorLevel::Graph) graph = &r;
    }
    REQUIRE(ent);
    REQUIRE(graph);
    for (size_t d = 0; d < ent->vector.size(); ++d)
        CHECK(graph->vector[d] == doctest::Approx(ent->vector[d]).epsilon(1e-6));
}

TEST_CASE("encode_graph: graph vector invariant under triple permutation") {
    HashingEmbedder emb(64);
    auto g = byd_graph();
    auto a = encode_graph(g, emb);
    std::swap(g.attribute_triples[0], g.attribute_triples[1]);
    auto b = encode_graph(g, emb);
    auto graph_vec = [](const std::vector<VectorRecord>& rs) {
        for (const auto& r : rs)
            if (r.level == VectorLevel::Graph) return r.vector;
        return std::vector<float>{};
    };
    CHECK(graph_vec(a) == graph_vec(b));
}

TEST_CASE("encode_graph: empty graph rejected") {
    HashingEmbedder emb(64);
    StockGraph g;
    g.stock = {"BYD", EntityKind::Stock};
    g.ticker = "002594.SZ";
    CHECK_THROWS_AS(encode_graph(g, emb), std::invalid_argument);
}

TEST_CASE("ingest: append, replace and dimension checks") {
    std::mt19937 rng(7);
    VectorIndex index(16);
    std::vector<VectorRecord> six(6);
    for (size_t i = 0; i < 6; ++i) {
        six[i].key = "k" + std::to_string(i);
        six[i].vector = random_unit(rng, 16);
    }
    index.ingest(six);
    CHECK(index.size() == 6);
    index.ingest(six); // same (key, stock, date) replaces in place
    CHECK(index.size() == 6);

    VectorRecord wrong;
    wrong.key = "w";
    wrong.vector = random_unit(rng, 8);
    CHECK_THROWS_AS(index.ingest({wrong}), std::invalid_argument);
}

TEST_CASE("mips_search: self match, k clamp, validation") {
    std::mt19937 rng(11);
    auto index = random_index(rng, 50, 32);
    auto q = index.records()[17].vector;
    auto hits = mips_search(index, q, nullptr, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].record->key == "r17");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& h : hits) {
        CHECK(h.score <= 1.0 + 1e-6);
        CHECK(h.score >= -1.0 - 1e-6);
    }

    CHECK(mips_search(index, q, nullptr, 1000).size() == 50);

    std::vector<float> not_unit(32, 1.0f);
    CHECK_THROWS_AS(mips_search(index, not_unit, nullptr, 3), std::invalid_argument);
    CHECK_THROWS_AS(mips_search(index, q, nullptr, 0), std::invalid_argument);
}

TEST_CASE("mips_search equals brute-force reference on random data") {
    std::mt19937 rng(23);
    // independent oracle: full sort by (score desc, key asc) computed here
    for (int trial = 0; trial < 5; ++trial) {
        auto index = random_index(rng, 200, 24);
        auto q = random_unit(rng, 24);
        struct Row {
            double score;
            std::string key;
        };
        std::vector<Row> oracle;
        for (const auto& r : index.records()) {
            double dot = 0.0;
            for (size_t d = 0; d < q.size(); ++d) dot += double(q[d]) * r.vector[d];
            oracle.push_back({double(float(dot)), r.key});
        }
        std::sort(oracle.begin(), oracle.end(), [](const Row& a, const Row& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.key < b.key;
        });
        for (size_t k : {size_t(1), size_t(10), size_t(200)}) {
            auto hits = mips_search(index, q, nullptr, k);
            auto serial = mips_search_serial(index, q, nullptr, k);
            REQUIRE(hits.size() == std::min(k, oracle.size()));
            REQUIRE(serial.size() == hits.size());
            for (size_t i = 0; i < hits.size(); ++i) {
                CHECK(hits[i].record->key == oracle[i].key);
                CHECK(hits[i].score == doctest::Approx(oracle[i].score).epsilon(1e-9));
                CHECK(serial[i].record->key == hits[i].record->key);
                CHECK(serial[i].score == hits[i].score);
            }
        }
    }
}

TEST_CASE("mips_search: filter predicate and top-k prefix property") {
    std::mt19937 rng(31);
    auto index = random_index(rng, 120, 16);
    auto q = random_unit(rng, 16);
    auto only_s3 = [](const VectorRecord& r) { return r.stock == "S3"; };
    auto hits = mips_search(index, q, only_s3, 1000);
    for (const auto& h : hits) CHECK(h.record->stock == "S3");
    CHECK(hits.size() == 120 / 7 + (3 < 120 % 7 ? 1 : 0));

    for (size_t k = 1; k < 8; ++k) {
        auto a = mips_search(index, q, nullptr, k);
        auto b = mips_search(index, q, nullptr, k + 1);
        for (size_t i = 0; i < a.size(); ++i)
            CHECK(a[i].record->key == b[i].record->key);
    }
}

TEST_CASE("index save / load round trip is exact") {
    HashingEmbedder emb(48);
    VectorIndex index(48);
    index.set_build_id("bid-1");
    index.ingest(encode_graph(byd_graph(), emb));
    fs::path path = fs::temp_directory_path() / "finkario_index_rt.vec";
    index.save(path.string());
    auto loaded = VectorIndex::load(path.string());
    CHECK(loaded.dimension() == 48);
    CHECK(loaded.build_id() == "bid-1");
    REQUIRE(loaded.size() == index.size());
    for (size_t i = 0; i < index.size(); ++i) {
        const auto& a = index.records()[i];
        const auto& b = loaded.records()[i];
        CHECK(a.key == b.key);
        CHECK(a.level == b.level);
        CHECK(a.stock == b.stock);
        CHECK(a.date == b.date);
        CHECK(a.entity_kind == b.entity_kind);
        CHECK(a.text == b.text);
        CHECK(a.vector == b.vector); // float-exact
    }
}
