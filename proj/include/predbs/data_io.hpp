#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "predbs/calibration.hpp"
#include "predbs/market.hpp"
#include "predbs/sde_sim.hpp"
#include "predbs/volatility.hpp"

namespace predbs::io {

/// A skipped or suspicious input row (1-based line number, 0 for file-level notes).
struct Diagnostic {
    std::size_t line = 0;
    std::string message;
};

// ---------------------------------------------------------------------------
// Option chains: header `quote_date,expiry,strike,right,bid,ask`

struct ChainParseResult {
    std::vector<OptionChain> chains;  // one per quote date, ascending
    std::vector<Diagnostic> diagnostics;
};

/// Rows that fail validation (bad fields, bid > ask, expiry before quote
/// date, ...) are skipped and reported. Throws ParseError for a missing or
/// incomplete header, DataQualityError when more than half the rows fail.
ChainParseResult parse_option_chains(std::istream& in, double spot, const std::string& symbol);

struct SingleChainResult {
    OptionChain chain;
    std::vector<Diagnostic> diagnostics;
};

/// As parse_option_chains, but the file must hold exactly one quote date.
SingleChainResult parse_option_chain(std::istream& in, double spot, const std::string& symbol);
SingleChainResult parse_option_chain(const std::filesystem::path& file, double spot,
                                     const std::string& symbol);

void write_option_chain(std::ostream& out, const OptionChain& chain);

// ---------------------------------------------------------------------------
// Return series: header `date,log_return` or `date,close`

/// Closes are converted to log-returns ln(S_t / S_{t-1}) dated at t.
/// Throws ParseError on malformed rows, unsorted dates or non-positive closes.
vol::ReturnSeries parse_return_series(std::istream& in);
vol::ReturnSeries parse_return_series(const std::filesystem::path& file);

void write_return_series(std::ostream& out, const vol::ReturnSeries& series);

// ---------------------------------------------------------------------------
// VIX closes: header `date,vix_close`

std::vector<std::pair<Date, double>> parse_vix_series(std::istream& in);
std::vector<std::pair<Date, double>> parse_vix_series(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Surfaces: CSV `moneyness,tau_years,p,clamped,market_price,model_price,residual`
// plus a JSON metadata document (method, sigma, spot, rate, as_of).

void write_surface(std::ostream& csv, const calib::PredictabilitySurface& surface);
void write_surface_metadata(std::ostream& json, const calib::PredictabilitySurface& surface);

struct SurfaceReadResult {
    calib::PredictabilitySurface surface;
    std::vector<Diagnostic> warnings;  // e.g. ignored extra columns
};

/// Reads the point grid. Unknown columns are ignored with a warning.
SurfaceReadResult read_surface(std::istream& csv);

/// Fills method, sigma, spot, rate and as_of from a metadata document.
void read_surface_metadata(std::istream& json, calib::PredictabilitySurface& surface);

/// `<file>` plus metadata sidecar `<file>.json`.
void write_surface_files(const std::filesystem::path& file, const calib::PredictabilitySurface& s);

/// Reads `<file>` and, when present, the `<file>.json` sidecar.
SurfaceReadResult read_surface_files(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Surface differences: CSV `moneyness,tau_years,dp`

void write_surface_diff(std::ostream& csv, const calib::SurfaceDiff& diff);

// ---------------------------------------------------------------------------
// Brownian fixture paths: CSV `t,B`

void write_brownian_path(std::ostream& csv, const sde::BrownianPath& path);
sde::BrownianPath read_brownian_path(std::istream& csv);
sde::BrownianPath read_brownian_path(const std::filesystem::path& file);

/// 17 significant digits, enough to round-trip any binary64 value.
std::string format_double(double v);

}  // namespace predbs::io
