#pragma once

#include "finkario/date.hpp"
#include "finkario/errors.hpp"
#include "finkario/guidance.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finkario {

struct PriceBar {
    std::string ticker;
    Date date;
    double close = 0.0;
};

// CSV `ticker,date,close`, keyed for O(log n) lookup.
class PriceTable {
public:
    static PriceTable from_file(const std::string& path);
    static PriceTable from_bars(const std::vector<PriceBar>& bars);

    std::optional<double> close(const std::string& ticker, const Date& date) const;
    std::vector<Date> all_dates() const; // sorted distinct

private:
    std::map<std::pair<std::string, std::string>, double> closes_; // (ticker, iso date)
    std::vector<Date> dates_;
};

struct TradingCalendar {
    std::vector<Date> dates; // strictly increasing

    static TradingCalendar from_prices(const PriceTable& prices);
    static TradingCalendar from_file(const std::string& path); // one ISO date per line
};

struct CalendarExhaustedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HolidayGapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Date next_trading_day(const TradingCalendar& cal, const Date& t);
// Last trading day of the ISO week after t's ISO week.
Date week_exit(const TradingCalendar& cal, const Date& t);

struct Trade {
    std::string ticker;
    Date entry_date;
    double entry_price = 0.0;
    Date exit_date;
    double exit_price = 0.0;
    double holding_return = 0.0;
};

struct SkippedSignal {
    Signal signal;
    std::string reason;
};

struct NavPoint {
    Date week_end;
    double nav = 1.0;
};

struct SimulationResult {
    std::vector<Trade> trades;
    std::vector<NavPoint> nav; // nav[0] = 1.0
    std::vector<SkippedSignal> skipped;
    // per-signal realized directions for ACC (Fall signals priced hypothetically)
    int acc_correct = 0;
    int acc_total = 0;
};

SimulationResult simulate(const std::vector<Signal>& signals, const PriceTable& prices,
                          const TradingCalendar& cal);

struct MetricsReport {
    double arr = 0.0;
    double vol = 0.0;
    std::optional<double> sr;
    double mdd = 0.0;
    std::optional<double> cr;
    std::optional<double> acc;
    size_t weeks = 0;
    size_t trades = 0;

    std::string to_json() const;
};

// ARR = (prod(1+r_w))^(52/W) - 1; VOL = sample stdev * sqrt(52); SR = ARR/VOL;
// MDD = max peak-to-trough; CR = ARR/MDD; SR/CR absent on zero denominators.
MetricsReport compute_metrics(const SimulationResult& sim);

// SR/CR from already-annualized inputs (the Table-style identity checks).
double sharpe_from(double arr, double vol);
double calmar_from(double arr, double mdd);

void emit_report(const MetricsReport& metrics, const SimulationResult& sim,
                 const std::string& out_dir,
                 const std::map<std::string, std::string>& industry_by_ticker = {});

std::vector<Signal> read_signals_file(const std::string& path);

} // namespace finkario
