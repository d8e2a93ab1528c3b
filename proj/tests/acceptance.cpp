// Acceptance gate: one pass/fail line per criterion, nonzero exit on any failure.
#include "finkario/backtest.hpp"
#include "finkario/corpus.hpp"
#include "finkario/extraction.hpp"
#include "finkario/graphstore.hpp"
#include "finkario/guidance.hpp"
#include "finkario/refinement.hpp"
#include "finkario/retrieval.hpp"
#include "finkario/schema.hpp"
#include "finkario/vectorstore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace finkario;

namespace {

std::vector<std::string> fails;
int exit_code = 0;

void check(bool ok, const std::string& msg) {
    if (!ok) fails.push_back(msg);
}

template <class F>
void criterion(int n, const std::string& name, double limit_s, F body) {
    fails.clear();
    auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        fails.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= limit_s)
        fails.push_back("runtime " + std::to_string(secs) + "s exceeds " +
                        std::to_string(limit_s) + "s");
    if (fails.empty()) {
        std::printf("criterion %d (%s): PASS (%.2fs)\n", n, name.c_str(), secs);
    } else {
        std::printf("criterion %d (%s): FAIL (%.2fs)\n", n, name.c_str(), secs);
        for (const auto& f : fails) std::printf("  - %s\n", f.c_str());
        exit_code = 1;
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// relative path -> bytes, for directory comparisons
std::map<std::string, std::string> dir_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

// ---- criterion 1 -----------------------------------------------------------

void table_identities() {
    struct Row {
        const char* name;
        double arr, vol, mdd, sr, cr;
    };
    // printed rows: (ARR, VOL, MDD) -> reproduce printed SR and CR within 0.02
    const Row rows[] = {
        {"CSI 300", 0.392, 0.295, 0.091, 1.330, 4.332},
        {"FinKario-RAG", 2.633, 0.534, 0.172, 4.926, 15.315},
        {"SOOCHOW", 1.625, 0.522, 0.132, 3.115, 12.311},
    };
    for (const auto& r : rows) {
        double sr = sharpe_from(r.arr, r.vol);
        double cr = calmar_from(r.arr, r.mdd);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s SR %.4f vs printed %.3f", r.name, sr, r.sr);
        check(std::abs(sr - r.sr) <= 0.02, buf);
        std::snprintf(buf, sizeof(buf), "%s CR %.4f vs printed %.3f", r.name, cr, r.cr);
        check(std::abs(cr - r.cr) <= 0.02, buf);
    }
}

// ---- criterion 2 -----------------------------------------------------------

GraphStore build_fixture_store() {
    auto s_a = builtin_attribute_schema();
    auto s_e = builtin_event_schema();
    auto ingested = ingest_directory(std::string(FIXTURE_DIR) + "/corpus");
    std::vector<RefinedDoc> docs;
    for (const auto& raw : ingested.reports) docs.push_back(refine(raw));

    RuleExtractor extractor;
    std::map<std::string, std::vector<ExtractionBatch>> by_ticker;
    std::map<std::string, std::string> label;
    for (const auto& doc : docs) {
        auto batch = extract_document(doc, s_a, s_e, extractor);
        std::string lbl = !batch.attribute_triples.empty()
                              ? batch.attribute_triples.front().head
                              : (doc.ticker ? *doc.ticker : doc.doc_id);
        std::string tk = doc.ticker ? *doc.ticker : lbl;
        by_ticker[tk].push_back(std::move(batch));
        label.emplace(tk, lbl);
    }
    AliasTable aliases = AliasTable::from_json(slurp(std::string(FIXTURE_DIR) + "/aliases.json"));
    CsvReferenceData refdata = CsvReferenceData::from_file(std::string(FIXTURE_DIR) + "/refdata.csv");
    auto chat = ScriptedChatProvider::empty();
    GraphStore store;
    for (const auto& [tk, batches] : by_ticker) {
        auto g = build_stock_graph(batches, label.at(tk), tk);
        auto [refined, report] = refine_graph(g, aliases, refdata, chat, docs);
        store.upsert(refined);
    }
    return store;
}

void schema_accounting() {
    auto s_a = builtin_attribute_schema();
    auto s_e = builtin_event_schema();
    check(s_a.relation_names.size() == 11,
          "builtin attribute relations: " + std::to_string(s_a.relation_names.size()));
    check(s_e.categories.size() == 8,
          "builtin event categories: " + std::to_string(s_e.categories.size()));
    auto stats = build_fixture_store().stats();
    check(stats.relation_type_count <= 19,
          "relation_type_count " + std::to_string(stats.relation_type_count) + " > 19");
    check(stats.relation_type_count == 19,
          "relation_type_count " + std::to_string(stats.relation_type_count) +
              " != 19 with all relations and categories exercised");
}

// ---- criterion 3 -----------------------------------------------------------

void retrieval_oracle() {
    std::mt19937 rng(20240901);
    HashingEmbedder embedder(32);
    const char* rels[] = {"Primary Industry", "Target Price", "Investment Rating",
                          "Key Products", "Risk Assessment", "Current Stock Price"};
    const char* cats[] = {"Demand", "Supply", "Revenue", "Macro"};
    for (int trial = 0; trial < 100; ++trial) {
        GraphStore store;
        int stocks = 1 + int(rng() % 20);
        for (int s = 0; s < stocks; ++s) {
            StockGraph g;
            std::string lbl = "Stock" + std::to_string(trial) + "_" + std::to_string(s);
            g.stock = {lbl, EntityKind::Stock};
            g.ticker = "T" + std::to_string(trial) + "." + std::to_string(s);
            int n = 1 + int(rng() % 12);
            for (int i = 0; i < n; ++i)
                g.attribute_triples.push_back({lbl, rels[rng() % 6],
                                               "v" + std::to_string(rng() % 5),
                                               Date{2024, 9, int(1 + rng() % 28)}, "doc"});
            int m = int(rng() % 4);
            for (int i = 0; i < m; ++i)
                g.event_records.push_back({lbl, "obj" + std::to_string(rng() % 3),
                                           "trigger" + std::to_string(rng() % 3),
                                           cats[rng() % 4], "", "",
                                           Date{2024, 9, int(1 + rng() % 28)}, "doc"});
            store.upsert(g);
        }
        store.set_build_id("x");
        VectorIndex index(32);
        index.set_build_id("x");
        for (const auto& tk : store.tickers())
            index.ingest(encode_graph(store.full_graph(tk), embedder));
        if (index.size() > 500) {
            check(false, "record budget exceeded: " + std::to_string(index.size()));
            return;
        }

        RetrievalOptions opts;
        opts.k_c = index.size();
        opts.k_f = index.size();
        opts.date_window_days = 100000;
        auto [sub, anchors] = retrieve("question " + std::to_string(trial), index, store,
                                       embedder, opts);

        // brute-force oracle: union of the anchors' full graphs
        std::set<std::string> anchor_stocks;
        for (const auto& a : anchors) anchor_stocks.insert(a.stock);
        std::set<AttributeTriple> want_attrs;
        std::set<EventRecord> want_events;
        for (const auto& s : anchor_stocks) {
            auto g = store.full_graph(s);
            want_attrs.insert(g.attribute_triples.begin(), g.attribute_triples.end());
            want_events.insert(g.event_records.begin(), g.event_records.end());
        }
        std::set<AttributeTriple> got_attrs(sub.attribute_triples.begin(),
                                            sub.attribute_triples.end());
        std::set<EventRecord> got_events(sub.event_records.begin(), sub.event_records.end());
        check(got_attrs == want_attrs, "trial " + std::to_string(trial) + ": triples differ");
        check(got_events == want_events, "trial " + std::to_string(trial) + ": events differ");

        // invariants: every returned item belongs to an anchor stock's graph
        for (const auto& t : sub.attribute_triples)
            check(want_attrs.count(t), "trial " + std::to_string(trial) +
                                           ": triple outside anchor scope: " + t.head);
        for (const auto& e : sub.event_records)
            check(want_events.count(e), "trial " + std::to_string(trial) +
                                            ": event outside anchor scope: " + e.subject);
        if (!fails.empty()) return;
    }
}

// ---- criterion 4 -----------------------------------------------------------

void mips_exactness() {
    const int dim = 64;
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    auto unit = [&] {
        std::vector<double> v(dim);
        double norm = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        std::vector<float> out(dim);
        for (int d = 0; d < dim; ++d) out[d] = float(v[d] / norm);
        return out;
    };

    VectorIndex index(dim);
    std::vector<VectorRecord> records(1000);
    for (int i = 0; i < 1000; ++i) {
        records[i].key = "r" + std::to_string(1000 + i);
        records[i].level = VectorLevel::Entity;
        records[i].stock = "S" + std::to_string(i % 37);
        records[i].vector = unit();
    }
    index.ingest(records);

    const size_t ks[] = {1, 5, 50};
    for (int q = 0; q < 1000; ++q) {
        auto query = unit();
        // reference: full sort by (float score desc, key asc)
        std::vector<std::pair<float, const VectorRecord*>> ref;
        for (const auto& r : index.records()) {
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += double(query[d]) * r.vector[d];
            ref.emplace_back(float(dot), &r);
        }
        std::sort(ref.begin(), ref.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second->key < b.second->key;
        });
        for (size_t k : ks) {
            auto hits = mips_search(index, query, nullptr, k);
            if (hits.size() != k) {
                check(false, "query " + std::to_string(q) + ": got " +
                                 std::to_string(hits.size()) + " hits for k=" +
                                 std::to_string(k));
                return;
            }
            for (size_t i = 0; i < k; ++i)
                if (hits[i].record->key != ref[i].second->key ||
                    hits[i].score != ref[i].first) {
                    check(false, "query " + std::to_string(q) + " k=" + std::to_string(k) +
                                     " rank " + std::to_string(i) + ": " +
                                     hits[i].record->key + " != " + ref[i].second->key);
                    return;
                }
        }
    }
}

// ---- criterion 5 -----------------------------------------------------------

void refinement_suite() {
    AliasTable aliases = AliasTable::from_json(slurp(std::string(FIXTURE_DIR) + "/aliases.json"));
    CsvReferenceData refdata = CsvReferenceData::from_file(std::string(FIXTURE_DIR) + "/refdata.csv");
    auto chat = ScriptedChatProvider::empty();

    check(aliases.resolve("BYD Inc.") == "BYD", "alias BYD Inc. -> " + aliases.resolve("BYD Inc."));
    check(aliases.resolve("BYD Auto") == "BYD", "alias BYD Auto -> " + aliases.resolve("BYD Auto"));

    RefinedDoc doc;
    doc.doc_id = "d1";
    doc.publish_date = Date{2024, 9, 2};
    doc.sections = {{"Overview", "BYD market capitalization reached 800 CNY billions."}};
    doc.body_text = doc.sections[0].second;
    std::vector<RefinedDoc> corpus = {doc};

    StockGraph g;
    g.stock = {"BYD Inc.", EntityKind::Stock};
    g.ticker = "002594.SZ";
    g.attribute_triples = {
        {"BYD Inc.", "Market Capitalization", "800", {2024, 9, 2}, "d1"},
        {"BYD Auto", "Primary Industry", "Automobiles", {2024, 9, 2}, "d1"},
        {"BYD Inc.", "Key Products", "No relevant information was found", {2024, 9, 2}, "d1"},
    };

    auto [refined, report] = refine_graph(g, aliases, refdata, chat, corpus);

    check(report.normalized_count >= 2,
          "normalized_count " + std::to_string(report.normalized_count));
    bool mcap_filled = false, placeholder_gone = true;
    for (const auto& t : refined.attribute_triples) {
        check(t.head == "BYD", "head not canonical: " + t.head);
        if (t.relation == "Market Capitalization") {
            mcap_filled = true;
            check(t.tail == "800 CNY billions",
                  "Market Capitalization tail: '" + t.tail + "'");
        }
        if (t.tail == "No relevant information was found") placeholder_gone = false;
    }
    check(mcap_filled, "Market Capitalization triple missing after refinement");
    check(placeholder_gone, "placeholder tail survived refinement");
    bool incorrigible = false;
    for (const auto& [what, why] : report.unresolved)
        if (why == "incorrigible") incorrigible = true;
    check(incorrigible, "dropped placeholder not reported as unresolved");

    // idempotence: a second pass is a no-op
    auto [again, r2] = refine_graph(refined, aliases, refdata, chat, corpus);
    check(r2.normalized_count == 0 && r2.completed_count == 0 && r2.corrected_count == 0,
          "second refinement pass was not a no-op");
    check(again.attribute_triples == refined.attribute_triples &&
              again.event_records == refined.event_records,
          "second refinement pass changed the graph");

    // no placeholder survives outside `unresolved` across the full fixture build
    auto store = build_fixture_store();
    RefinementOptions opts;
    for (const auto& tk : store.tickers())
        for (const auto& t : store.full_graph(tk).attribute_triples)
            for (const auto& p : opts.placeholders)
                check(t.tail != p, "placeholder in store: " + t.head + " / " + t.relation);
}

// ---- criteria 6 + 7 --------------------------------------------------------

TradingCalendar mon_fri(Date from, Date to) {
    TradingCalendar cal;
    for (std::int64_t s = from.serial(); s <= to.serial(); ++s) {
        Date d = Date::from_serial(s);
        if (d.iso_weekday() <= 5) cal.dates.push_back(d);
    }
    return cal;
}

void backtest_hand_check() {
    auto prices = PriceTable::from_bars({{"AAA", {2024, 9, 3}, 10.0},
                                         {"AAA", {2024, 9, 10}, 10.5},
                                         {"AAA", {2024, 9, 13}, 11.0},
                                         {"AAA", {2024, 9, 20}, 11.55},
                                         {"BBB", {2024, 9, 4}, 20.0},
                                         {"BBB", {2024, 9, 13}, 14.0}});
    std::vector<Signal> signals = {{"AAA", {2024, 9, 2}, "Rise", 0.8, "", "t"},
                                   {"BBB", {2024, 9, 3}, "Rise", 0.7, "", "t"},
                                   {"AAA", {2024, 9, 9}, "Rise", 0.9, "", "t"}};
    auto cal = mon_fri({2024, 9, 2}, {2024, 9, 20});
    auto sim = simulate(signals, prices, cal);

    // hand-computed: returns +0.10, -0.30, +0.10; weekly means -0.10 then +0.10
    check(sim.trades.size() == 3, "trades: " + std::to_string(sim.trades.size()));
    const double want_rets[] = {0.10, 0.10, -0.30}; // sorted by (stock, signal date)
    for (size_t i = 0; i < sim.trades.size() && i < 3; ++i)
        check(std::abs(sim.trades[i].holding_return - want_rets[i]) <= 1e-9,
              "trade " + std::to_string(i) + " return " +
                  std::to_string(sim.trades[i].holding_return));
    const double want_nav[] = {1.0, 0.9, 0.99};
    check(sim.nav.size() == 3, "nav points: " + std::to_string(sim.nav.size()));
    for (size_t i = 0; i < sim.nav.size() && i < 3; ++i)
        check(std::abs(sim.nav[i].nav - want_nav[i]) <= 1e-9,
              "nav[" + std::to_string(i) + "] = " + std::to_string(sim.nav[i].nav));

    auto m = compute_metrics(sim);
    double arr = std::pow(0.99, 52.0 / 2.0) - 1.0;
    double vol = std::sqrt(0.02) * std::sqrt(52.0);
    check(std::abs(m.arr - arr) <= 1e-9, "ARR " + std::to_string(m.arr));
    check(std::abs(m.vol - vol) <= 1e-9, "VOL " + std::to_string(m.vol));
    check(m.sr && std::abs(*m.sr - arr / vol) <= 1e-9, "SR mismatch");
    check(std::abs(m.mdd - 0.1) <= 1e-9, "MDD " + std::to_string(m.mdd));
    check(m.cr && std::abs(*m.cr - arr / 0.1) <= 1e-9, "CR mismatch");
    check(m.acc && std::abs(*m.acc - 2.0 / 3.0) <= 1e-9, "ACC mismatch");

    // NAV [1.0, 1.1, 0.99, 1.2] -> MDD = (1.1 - 0.99)/1.1 = 0.10, exactly the
    // value of the peak-trough expression in doubles
    SimulationResult fixed;
    double navs[] = {1.0, 1.1, 0.99, 1.2};
    for (int i = 0; i < 4; ++i)
        fixed.nav.push_back({Date::from_serial(19967 + 7 * i), navs[i]});
    double mdd = compute_metrics(fixed).mdd;
    check(mdd == (1.1 - 0.99) / 1.1, "MDD != (1.1 - 0.99)/1.1: " + std::to_string(mdd));
    check(std::abs(mdd - 0.10) <= 1e-15, "MDD differs from 0.10: " + std::to_string(mdd));
}

void perfect_foresight() {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> step(-0.04, 0.05);
    auto cal = mon_fri({2024, 9, 2}, {2024, 11, 1});
    std::vector<PriceBar> bars;
    const char* tickers[] = {"AAA", "BBB", "CCC"};
    for (const char* tk : tickers) {
        double px = 50.0;
        for (const auto& d : cal.dates) {
            bars.push_back({tk, d, px});
            px *= 1.0 + step(rng);
        }
    }
    auto prices = PriceTable::from_bars(bars);

    // scripted analyst with perfect foresight: label from the realized return
    std::vector<Signal> signals;
    for (const char* tk : tickers)
        for (int i = 0; i + 10 < (int)cal.dates.size(); i += 3) {
            Date t = cal.dates[i];
            double entry = *prices.close(tk, next_trading_day(cal, t));
            double exit = *prices.close(tk, week_exit(cal, t));
            signals.push_back({tk, t, exit > entry ? "Rise" : "Fall", 1.0, "", "t"});
        }

    auto sim = simulate(signals, prices, cal);
    auto m = compute_metrics(sim);
    check(sim.acc_total == (int)signals.size(),
          "acc_total " + std::to_string(sim.acc_total));
    check(m.acc && *m.acc == 1.0, "ACC != 1.0");
    for (size_t i = 1; i < sim.nav.size(); ++i)
        check(sim.nav[i].nav >= sim.nav[i - 1].nav,
              "NAV decreased at point " + std::to_string(i));
    check(m.mdd == 0.0, "MDD " + std::to_string(m.mdd));
}

// ---- criterion 8 -----------------------------------------------------------

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

void end_to_end(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = CLI_PATH;
    const std::string fx = FIXTURE_DIR;
    const std::string d = dir.string();
    auto step = [&](const std::string& cmd, const std::string& what) {
        int rc = run(cmd);
        if (rc != 0) throw std::runtime_error(what + " exited with " + std::to_string(rc));
    };
    step(cli + " ingest --corpus " + fx + "/corpus --out " + d + "/refined.jsonl > " + d +
             "/ingest.txt",
         "ingest");
    step(cli + " build --refined " + d + "/refined.jsonl --store " + d + "/store --aliases " +
             fx + "/aliases.json --refdata " + fx + "/refdata.csv > " + d + "/build.txt",
         "build");
    step(cli + " index --store " + d + "/store --index " + d + "/index.vec > " + d +
             "/index.txt",
         "index");
    step(cli + " query --store " + d + "/store --index " + d +
             "/index.vec --query \"BYD battery platform outlook September\" > " + d +
             "/query.txt",
         "query");
    // last line of the query output is the signal
    {
        std::istringstream in(slurp(dir / "query.txt"));
        std::string line, last;
        while (std::getline(in, line))
            if (!line.empty()) last = line;
        std::ofstream out(dir / "signals.jsonl", std::ios::binary);
        out << last << "\n";
    }
    step(cli + " backtest --prices " + fx + "/prices.csv --signals " + d +
             "/signals.jsonl --out " + d + "/report --store " + d + "/store > " + d +
             "/backtest.txt",
         "backtest");
}

void offline_determinism() {
    auto base = fs::temp_directory_path() / "finkario_accept";
    end_to_end(base / "run1");
    end_to_end(base / "run2");
    auto a = dir_bytes(base / "run1");
    auto b = dir_bytes(base / "run2");
    check(a.size() == b.size(), "different file counts between runs");
    for (const auto& [rel, bytes] : a) {
        auto it = b.find(rel);
        if (it == b.end()) {
            check(false, "missing in second run: " + rel);
            continue;
        }
        check(bytes == it->second, "output differs between runs: " + rel);
    }
    fs::remove_all(base);
}

} // namespace

int main() {
    criterion(1, "Table metric identities", 1.0, table_identities);
    criterion(2, "schema accounting", 1.0, schema_accounting);
    criterion(3, "retrieval oracle equivalence", 30.0, retrieval_oracle);
    criterion(4, "MIPS exactness", 10.0, mips_exactness);
    criterion(5, "refinement suite", 1.0, refinement_suite);
    criterion(6, "backtest hand-check", 1.0, backtest_hand_check);
    criterion(7, "perfect-foresight sanity", 5.0, perfect_foresight);
    criterion(8, "end-to-end offline determinism", 60.0, offline_determinism);
    return exit_code;
}
