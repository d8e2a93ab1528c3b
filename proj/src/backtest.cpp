#include "finkario/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace finkario {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// serial of the Thursday of the date's ISO week; consecutive weeks differ by 7
std::int64_t week_key(const Date& d) { return d.add_days(4 - d.iso_weekday()).serial(); }

} // namespace

PriceTable PriceTable::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open price file: " + path);
    std::vector<PriceBar> bars;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue; // header
        }
        std::istringstream ls(line);
        std::string ticker, date_s, close_s;
        if (!std::getline(ls, ticker, ',') || !std::getline(ls, date_s, ',') ||
            !std::getline(ls, close_s))
            throw ParseError("price csv: bad row", line);
        auto d = Date::parse(date_s);
        if (!d) throw ParseError("price csv: bad date", line);
        double close = std::stod(close_s);
        if (close <= 0.0) throw ParseError("price csv: close must be positive", line);
        bars.push_back(PriceBar{ticker, *d, close});
    }
    return from_bars(bars);
}

PriceTable PriceTable::from_bars(const std::vector<PriceBar>& bars) {
    PriceTable t;
    std::set<Date> dates;
    for (const auto& b : bars) {
        auto [it, inserted] = t.closes_.emplace(
            std::make_pair(b.ticker, b.date.to_string()), b.close);
        if (!inserted) throw ParseError("duplicate price bar: " + b.ticker + " " +
                                        b.date.to_string());
        dates.insert(b.date);
    }
    t.dates_.assign(dates.begin(), dates.end());
    return t;
}

std::optional<double> PriceTable::close(const std::string& ticker, const Date& date) const {
    auto it = closes_.find({ticker, date.to_string()});
    if (it == closes_.end()) return std::nullopt;
    return it->second;
}

std::vector<Date> PriceTable::all_dates() const { return dates_; }

TradingCalendar TradingCalendar::from_prices(const PriceTable& prices) {
    return TradingCalendar{prices.all_dates()};
}

TradingCalendar TradingCalendar::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calendar file: " + path);
    std::set<Date> dates;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto d = Date::parse(line);
        if (!d) throw ParseError("calendar: bad date", line);
        dates.insert(*d);
    }
    return TradingCalendar{{dates.begin(), dates.end()}};
}

Date next_trading_day(const TradingCalendar& cal, const Date& t) {
    auto it = std::upper_bound(cal.dates.begin(), cal.dates.end(), t);
    if (it == cal.dates.end())
        throw CalendarExhaustedError("no trading day after " + t.to_string());
    return *it;
}

Date week_exit(const TradingCalendar& cal, const Date& t) {
    const std::int64_t target = week_key(t) + 7;
    std::optional<Date> best;
    for (const auto& d : cal.dates) {
        if (week_key(d) != target) continue;
        if (!best || *best < d) best = d;
    }
    if (!best)
        throw HolidayGapError("no trading day in the week after " + t.to_string());
    return *best;
}

SimulationResult simulate(const std::vector<Signal>& signals, const PriceTable& prices,
                          const TradingCalendar& cal) {
    SimulationResult result;

    std::vector<Signal> unique;
    {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& s : signals)
            if (seen.insert({s.stock, s.signal_date.to_string()}).second)
                unique.push_back(s);
    }
    std::stable_sort(unique.begin(), unique.end(), [](const Signal& a, const Signal& b) {
        return std::tie(a.stock, a.signal_date) < std::tie(b.stock, b.signal_date);
    });

    for (const auto& s : unique) {
        Date entry_date, exit_date;
        try {
            entry_date = next_trading_day(cal, s.signal_date);
            exit_date = week_exit(cal, s.signal_date);
        } catch (const CalendarExhaustedError& e) {
            result.skipped.push_back({s, e.what()});
            continue;
        } catch (const HolidayGapError& e) {
            result.skipped.push_back({s, e.what()});
            continue;
        }
        auto entry = prices.close(s.stock, entry_date);
        auto exit = prices.close(s.stock, exit_date);
        if (!entry || !exit) {
            result.skipped.push_back({s, !entry ? "missing entry price" : "missing exit price"});
            continue;
        }
        double ret = *exit / *entry - 1.0;

        // ACC over all priced signals; Fall returns are hypothetical
        ++result.acc_total;
        bool realized_rise = ret > 0.0;
        if ((s.label == "Rise" && realized_rise) || (s.label == "Fall" && !realized_rise))
            ++result.acc_correct;

        if (s.label == "Rise")
            result.trades.push_back(
                Trade{s.stock, entry_date, *entry, exit_date, *exit, ret});
    }

    // weekly compounding from exit weeks
    if (result.trades.empty()) {
        Date d0 = cal.dates.empty() ? Date{1970, 1, 1} : cal.dates.front();
        result.nav.push_back({d0, 1.0});
        return result;
    }
    std::map<std::int64_t, std::vector<double>> by_week;
    for (const auto& t : result.trades)
        by_week[week_key(t.exit_date)].push_back(t.holding_return);

    // last calendar date per week, for NAV point dates
    std::map<std::int64_t, Date> week_end;
    for (const auto& d : cal.dates) {
        auto [it, inserted] = week_end.emplace(week_key(d), d);
        if (!inserted && it->second < d) it->second = d;
    }

    const std::int64_t first_week = by_week.begin()->first;
    const std::int64_t last_week = by_week.rbegin()->first;

    Date nav0_date = cal.dates.front();
    {
        auto prev = week_end.find(first_week - 7);
        if (prev != week_end.end()) nav0_date = prev->second;
    }
    result.nav.push_back({nav0_date, 1.0});
    double nav = 1.0;
    for (std::int64_t wk = first_week; wk <= last_week; wk += 7) {
        double r = 0.0;
        auto it = by_week.find(wk);
        if (it != by_week.end()) {
            for (double x : it->second) r += x;
            r /= static_cast<double>(it->second.size());
        }
        nav *= 1.0 + r;
        Date end = week_end.count(wk) ? week_end.at(wk)
                                      : Date::from_serial(wk + 1); // ISO Friday
        result.nav.push_back({end, nav});
    }
    return result;
}

double sharpe_from(double arr, double vol) { return arr / vol; }
double calmar_from(double arr, double mdd) { return arr / mdd; }

MetricsReport compute_metrics(const SimulationResult& sim) {
    MetricsReport m;
    m.trades = sim.trades.size();
    const auto& nav = sim.nav;
    const size_t W = nav.size() > 1 ? nav.size() - 1 : 0;
    m.weeks = W;

    if (W >= 1) {
        std::vector<double> returns;
        for (size_t i = 1; i < nav.size(); ++i)
            returns.push_back(nav[i].nav / nav[i - 1].nav - 1.0);
        double growth = nav.back().nav / nav.front().nav;
        m.arr = std::pow(growth, 52.0 / static_cast<double>(W)) - 1.0;
        if (W >= 2) {
            double mean = 0.0;
            for (double r : returns) mean += r;
            mean /= static_cast<double>(returns.size());
            double ss = 0.0;
            for (double r : returns) ss += (r - mean) * (r - mean);
            m.vol = std::sqrt(ss / static_cast<double>(returns.size() - 1)) *
                    std::sqrt(52.0);
        } else {
            m.vol = 0.0;
        }
        if (m.vol > 0.0) m.sr = sharpe_from(m.arr, m.vol);
    }

    double peak = nav.empty() ? 1.0 : nav.front().nav;
    double mdd = 0.0;
    for (const auto& p : nav) {
        if (p.nav > peak) peak = p.nav;
        double dd = (peak - p.nav) / peak;
        if (dd > mdd) mdd = dd;
    }
    m.mdd = mdd;
    if (m.mdd > 0.0) m.cr = calmar_from(m.arr, m.mdd);

    if (sim.acc_total > 0)
        m.acc = static_cast<double>(sim.acc_correct) / sim.acc_total;
    return m;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["arr"] = arr;
    j["vol"] = vol;
    j["sr"] = sr ? nlohmann::json(*sr) : nlohmann::json(nullptr);
    j["mdd"] = mdd;
    j["cr"] = cr ? nlohmann::json(*cr) : nlohmann::json(nullptr);
    j["acc"] = acc ? nlohmann::json(*acc) : nlohmann::json(nullptr);
    j["weeks"] = weeks;
    j["trades"] = trades;
    return j.dump(2);
}

void emit_report(const MetricsReport& metrics, const SimulationResult& sim,
                 const std::string& out_dir,
                 const std::map<std::string, std::string>& industry_by_ticker) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output dir: " + out_dir);

    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + name + " in " + out_dir);
        out << content;
    };

    {
        std::string csv = "week_end,nav\n";
        for (const auto& p : sim.nav)
            csv += p.week_end.to_string() + "," + fmt(p.nav) + "\n";
        write("nav.csv", csv);
    }
    {
        std::string csv = "ticker,entry_date,entry_price,exit_date,exit_price,holding_return\n";
        for (const auto& t : sim.trades)
            csv += t.ticker + "," + t.entry_date.to_string() + "," + fmt(t.entry_price) +
                   "," + t.exit_date.to_string() + "," + fmt(t.exit_price) + "," +
                   fmt(t.holding_return) + "\n";
        write("trades.csv", csv);
    }
    write("metrics.json", metrics.to_json() + "\n");

    if (!industry_by_ticker.empty()) {
        std::map<std::string, int> counts;
        for (const auto& t : sim.trades) {
            auto it = industry_by_ticker.find(t.ticker);
            counts[it != industry_by_ticker.end() ? it->second : "Unknown"]++;
        }
        std::string csv = "industry,trades\n";
        for (const auto& [industry, n] : counts)
            csv += industry + "," + std::to_string(n) + "\n";
        write("industry_counts.csv", csv);
    }
}

std::vector<Signal> read_signals_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open signals file: " + path);
    std::vector<Signal> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(Signal::from_json_line(line));
    }
    return out;
}

} // namespace finkario
