#include "predbs/data_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>

#include "predbs/error.hpp"

namespace predbs::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

/// Line-oriented CSV with a named header. Blank lines are skipped.
class CsvTable {
  public:
    explicit CsvTable(std::istream& in) : in_(in) {}

    /// Reads the header and locates `required` columns. Extra columns are
    /// recorded in `ignored`.
    void read_header(const std::vector<std::string>& required, std::vector<Diagnostic>* ignored) {
        read_raw_header();
        select(required, ignored);
    }

    void read_raw_header() {
        std::string line;
        if (!next_line(line)) throw ParseError("missing header");
        header_.clear();
        for (auto f : split(line)) header_.emplace_back(f);
        if (header_[0].starts_with("\xEF\xBB\xBF")) header_[0].erase(0, 3);
        header_line_ = line_no_;
    }

    void select(const std::vector<std::string>& required, std::vector<Diagnostic>* ignored) {
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (!pos.emplace(header_[i], i).second) {
                throw ParseError("duplicate column '" + header_[i] + "'", header_line_);
            }
        }
        columns_.clear();
        for (const auto& name : required) {
            const auto it = pos.find(name);
            if (it == pos.end()) throw ParseError("header lacks column '" + name + "'", header_line_);
            columns_.push_back(it->second);
        }
        if (ignored) {
            for (std::size_t i = 0; i < header_.size(); ++i) {
                if (std::find(columns_.begin(), columns_.end(), i) == columns_.end()) {
                    ignored->push_back({header_line_, "ignoring unknown column '" + header_[i] + "'"});
                }
            }
        }
    }

    bool has_column(std::string_view name) const {
        return std::find(header_.begin(), header_.end(), name) != header_.end();
    }

    /// Next data row as the required columns in order. Throws ParseError when
    /// the field count disagrees with the header.
    bool next_row(std::vector<std::string_view>& fields) {
        if (!next_line(row_)) return false;
        const auto all = split(row_);
        if (all.size() != header_.size()) {
            throw ParseError("expected " + std::to_string(header_.size()) + " fields, found " +
                                 std::to_string(all.size()),
                             line_no_);
        }
        fields.clear();
        for (std::size_t c : columns_) fields.push_back(all[c]);
        return true;
    }

    std::size_t line() const noexcept { return line_no_; }

  private:
    bool next_line(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!trim(line).empty()) return true;
        }
        return false;
    }

    std::istream& in_;
    std::vector<std::string> header_;
    std::vector<std::size_t> columns_;
    std::string row_;
    std::size_t line_no_ = 0;
    std::size_t header_line_ = 0;
};

Date require_date(std::string_view s, std::size_t line) {
    const auto d = parse_iso_date(s);
    if (!d) throw ParseError("invalid ISO-8601 date '" + std::string(s) + "'", line);
    return *d;
}

double require_number(std::string_view s, std::size_t line, const char* what) {
    const auto v = parse_number(s);
    if (!v) throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
    return *v;
}

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + file.string() + "'");
    return in;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write '" + file.string() + "'");
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Option chains

ChainParseResult parse_option_chains(std::istream& in, double spot, const std::string& symbol) {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw InputError("spot must be positive");
    ChainParseResult result;
    CsvTable table(in);
    table.read_header({"quote_date", "expiry", "strike", "right", "bid", "ask"}, &result.diagnostics);

    std::map<Date, OptionChain> by_date;
    std::size_t rows = 0, rejected = 0;
    std::vector<std::string_view> f;
    for (;;) {
        bool counted = false;
        try {
            if (!table.next_row(f)) break;
            ++rows;
            counted = true;
            const std::size_t ln = table.line();
            OptionQuote q;
            q.quote_date = require_date(f[0], ln);
            q.expiry = require_date(f[1], ln);
            q.strike = require_number(f[2], ln, "strike");
            const auto right = parse_option_right(f[3]);
            if (!right) throw ParseError("invalid right '" + std::string(f[3]) + "'", ln);
            q.right = *right;
            q.bid = require_number(f[4], ln, "bid");
            q.ask = require_number(f[5], ln, "ask");
            if (!(q.strike > 0.0)) throw ParseError("strike must be positive", ln);
            if (q.bid < 0.0) throw ParseError("negative bid", ln);
            if (q.bid > q.ask) throw ParseError("bid exceeds ask", ln);
            if (q.expiry < q.quote_date) throw ParseError("expiry precedes quote date", ln);

            auto& chain = by_date[q.quote_date];
            chain.quote_date = q.quote_date;
            chain.quotes.push_back(q);
        } catch (const ParseError& e) {
            if (e.line() == 0) throw;
            if (!counted) ++rows;
            ++rejected;
            result.diagnostics.push_back({e.line(), e.what()});
        }
    }
    if (rows > 0 && 2 * rejected > rows) {
        throw DataQualityError(std::to_string(rejected) + " of " + std::to_string(rows) +
                               " option rows rejected");
    }
    for (auto& [date, chain] : by_date) {
        chain.spot = spot;
        chain.symbol = symbol;
        result.chains.push_back(std::move(chain));
    }
    return result;
}

SingleChainResult parse_option_chain(std::istream& in, double spot, const std::string& symbol) {
    ChainParseResult all = parse_option_chains(in, spot, symbol);
    if (all.chains.size() > 1) {
        throw ParseError("file holds " + std::to_string(all.chains.size()) +
                         " quote dates; expected one");
    }
    SingleChainResult r;
    if (all.chains.empty()) {
        r.chain.spot = spot;
        r.chain.symbol = symbol;
    } else {
        r.chain = std::move(all.chains.front());
    }
    r.diagnostics = std::move(all.diagnostics);
    return r;
}

SingleChainResult parse_option_chain(const std::filesystem::path& file, double spot,
                                     const std::string& symbol) {
    auto in = open_in(file);
    return parse_option_chain(in, spot, symbol);
}

void write_option_chain(std::ostream& out, const OptionChain& chain) {
    out << "quote_date,expiry,strike,right,bid,ask\n";
    for (const auto& q : chain.quotes) {
        out << format_iso_date(q.quote_date) << ',' << format_iso_date(q.expiry) << ','
            << format_double(q.strike) << ',' << to_string(q.right) << ',' << format_double(q.bid)
            << ',' << format_double(q.ask) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Return series

vol::ReturnSeries parse_return_series(std::istream& in) {
    CsvTable table(in);
    table.read_raw_header();
    const bool closes = !table.has_column("log_return") && table.has_column("close");
    table.select({"date", closes ? "close" : "log_return"}, nullptr);

    vol::ReturnSeries series;
    std::optional<Date> prev_date;
    double prev_close = 0.0;
    std::vector<std::string_view> f;
    while (table.next_row(f)) {
        const std::size_t ln = table.line();
        const Date d = require_date(f[0], ln);
        const double v = require_number(f[1], ln, closes ? "close" : "log return");
        if (prev_date && !(*prev_date < d)) throw ParseError("dates must be strictly ascending", ln);
        if (closes) {
            if (!(v > 0.0)) throw ParseError("close must be positive", ln);
            if (prev_date) {
                series.dates.push_back(d);
                series.returns.push_back(std::log(v / prev_close));
            }
            prev_close = v;
        } else {
            series.dates.push_back(d);
            series.returns.push_back(v);
        }
        prev_date = d;
    }
    try {
        vol::validate(series);
    } catch (const InputError& e) {
        throw ParseError(e.what());
    }
    return series;
}

vol::ReturnSeries parse_return_series(const std::filesystem::path& file) {
    auto in = open_in(file);
    return parse_return_series(in);
}

void write_return_series(std::ostream& out, const vol::ReturnSeries& series) {
    out << "date,log_return\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_iso_date(series.dates[i]) << ',' << format_double(series.returns[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// VIX

std::vector<std::pair<Date, double>> parse_vix_series(std::istream& in) {
    CsvTable table(in);
    table.read_header({"date", "vix_close"}, nullptr);
    std::vector<std::pair<Date, double>> out;
    std::vector<std::string_view> f;
    while (table.next_row(f)) {
        const Date d = require_date(f[0], table.line());
        const double v = require_number(f[1], table.line(), "VIX close");
        if (v < 0.0) throw ParseError("negative VIX close", table.line());
        if (!out.empty() && !(out.back().first < d)) {
            throw ParseError("dates must be strictly ascending", table.line());
        }
        out.emplace_back(d, v);
    }
    if (out.empty()) throw ParseError("VIX file has no rows");
    return out;
}

std::vector<std::pair<Date, double>> parse_vix_series(const std::filesystem::path& file) {
    auto in = open_in(file);
    return parse_vix_series(in);
}

// ---------------------------------------------------------------------------
// Surfaces

void write_surface(std::ostream& csv, const calib::PredictabilitySurface& s) {
    csv << "moneyness,tau_years,p,clamped,market_price,model_price,residual\n";
    for (const auto& pt : s.points) {
        csv << format_double(pt.moneyness) << ',' << format_double(pt.tau) << ','
            << format_double(pt.p) << ',' << calib::to_string(pt.clamped) << ','
            << format_double(pt.market_price) << ',' << format_double(pt.model_price) << ','
            << format_double(pt.residual) << '\n';
    }
}

void write_surface_metadata(std::ostream& json, const calib::PredictabilitySurface& s) {
    nlohmann::ordered_json j;
    j["method"] = vol::to_string(s.method);
    j["sigma"] = s.sigma;
    j["spot"] = s.spot;
    j["rate"] = s.rate;
    j["as_of"] = format_iso_date(s.as_of);
    j["points"] = s.points.size();
    json << j.dump(2) << '\n';
}

SurfaceReadResult read_surface(std::istream& csv) {
    SurfaceReadResult r;
    CsvTable table(csv);
    table.read_header({"moneyness", "tau_years", "p", "clamped", "market_price", "model_price", "residual"},
                      &r.warnings);
    std::vector<std::string_view> f;
    while (table.next_row(f)) {
        const std::size_t ln = table.line();
        calib::CalibrationPoint pt;
        pt.moneyness = require_number(f[0], ln, "moneyness");
        pt.tau = require_number(f[1], ln, "tau_years");
        pt.p = require_number(f[2], ln, "p");
        const auto c = calib::parse_clamp(f[3]);
        if (!c) throw ParseError("invalid clamp flag '" + std::string(f[3]) + "'", ln);
        pt.clamped = *c;
        pt.market_price = require_number(f[4], ln, "market_price");
        pt.model_price = require_number(f[5], ln, "model_price");
        pt.residual = require_number(f[6], ln, "residual");
        if (!(pt.p >= -1.0 && pt.p <= 1.0)) throw ParseError("p outside [-1, 1]", ln);
        r.surface.points.push_back(pt);
    }
    return r;
}

void read_surface_metadata(std::istream& json, calib::PredictabilitySurface& s) {
    try {
        const auto j = nlohmann::json::parse(json);
        const auto method = vol::parse_vol_method(j.at("method").get<std::string>());
        if (!method) throw ParseError("unknown volatility method in surface metadata");
        const auto as_of = parse_iso_date(j.at("as_of").get<std::string>());
        if (!as_of) throw ParseError("invalid as_of date in surface metadata");
        s.method = *method;
        s.sigma = j.at("sigma").get<double>();
        s.spot = j.at("spot").get<double>();
        s.rate = j.at("rate").get<double>();
        s.as_of = *as_of;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("surface metadata: ") + e.what());
    }
}

void write_surface_files(const std::filesystem::path& file, const calib::PredictabilitySurface& s) {
    {
        auto out = open_out(file);
        write_surface(out, s);
    }
    auto meta = open_out(file.string() + ".json");
    write_surface_metadata(meta, s);
}

SurfaceReadResult read_surface_files(const std::filesystem::path& file) {
    auto in = open_in(file);
    SurfaceReadResult r = read_surface(in);
    const std::filesystem::path meta = file.string() + ".json";
    if (std::filesystem::exists(meta)) {
        auto min = open_in(meta);
        read_surface_metadata(min, r.surface);
    } else {
        r.warnings.push_back({0, "no metadata sidecar '" + meta.string() + "'"});
    }
    return r;
}

void write_surface_diff(std::ostream& csv, const calib::SurfaceDiff& diff) {
    csv << "moneyness,tau_years,dp\n";
    for (const auto& pt : diff.points) {
        csv << format_double(pt.moneyness) << ',' << format_double(pt.tau) << ','
            << format_double(pt.dp) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Brownian paths

void write_brownian_path(std::ostream& csv, const sde::BrownianPath& path) {
    csv << "t,B\n";
    for (std::size_t j = 0; j < path.times().size(); ++j) {
        csv << format_double(path.times()[j]) << ',' << format_double(path.values()[j]) << '\n';
    }
}

sde::BrownianPath read_brownian_path(std::istream& csv) {
    CsvTable table(csv);
    table.read_header({"t", "B"}, nullptr);
    std::vector<double> t, b;
    std::vector<std::string_view> f;
    while (table.next_row(f)) {
        t.push_back(require_number(f[0], table.line(), "time"));
        b.push_back(require_number(f[1], table.line(), "Brownian value"));
    }
    try {
        return sde::BrownianPath::from_samples(std::move(t), std::move(b));
    } catch (const InputError& e) {
        throw ParseError(e.what());
    }
}

sde::BrownianPath read_brownian_path(const std::filesystem::path& file) {
    auto in = open_in(file);
    return read_brownian_path(in);
}

}  // namespace predbs::io
