#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "predbs/dates.hpp"
#include "predbs/market.hpp"
#include "predbs/volatility.hpp"

namespace predbs::calib {

/// Which boundary of [-1, 1] a calibrated p was pinned to, if any.
enum class Clamp { none, at_minus_one, at_plus_one };

std::string_view to_string(Clamp c);
std::optional<Clamp> parse_clamp(std::string_view text);

struct CalibrationPoint {
    double moneyness = 0.0;  // spot / strike
    double tau = 0.0;        // years, ACT/365
    double p = 0.0;
    Clamp clamped = Clamp::none;
    double market_price = 0.0;
    double model_price = 0.0;  // call price at the returned p
    double residual = 0.0;     // model_price - market_price
};

struct SolverOptions {
    // terminal bracket width on p; |dC/dp| <= sigma^2 tau S keeps the price
    // residual far below 1e-9 * spot at this width
    double p_tolerance = 1e-10;
    int max_iterations = 200;
};

/// Backs out the excess predictability p in [-1, 1] that reprices a call
/// quote. Call prices fall strictly in p, so the root is unique when it
/// exists; quotes above C(p = -1) clamp to -1 and quotes below C(p = +1)
/// clamp to +1.
///
/// Throws InputError for invalid pricing inputs or a non-positive price and
/// QuoteRejectedError when the quote lies outside the static bounds
///   max(S e^{-sigma^2 tau} - K e^{-r tau}, 0) <= C <= S e^{sigma^2 tau}
/// spanned by every admissible p, or when the price does not depend on p.
CalibrationPoint implied_excess_predictability(double market_price, double spot, double strike,
                                               double tau, double rate, double sigma,
                                               const SolverOptions& opts = {});

struct SurfaceIssue {
    double strike = 0.0;
    Date expiry;
    std::string message;
};

/// Calibrated p over (moneyness, time-to-maturity) for one sigma estimator.
struct PredictabilitySurface {
    vol::VolMethod method = vol::VolMethod::historical;
    double sigma = 0.0;  // annualized sigma used for every point
    Date as_of;
    double spot = 0.0;
    double rate = 0.0;
    std::vector<CalibrationPoint> points;
    std::vector<SurfaceIssue> issues;  // skipped quotes; not persisted
};

/// One point per usable call quote, calibrated against the quote mid and
/// ordered by (expiry, strike). Puts, zero/crossed markets, expired quotes
/// and rejected prices become issues instead of points.
/// Throws InputError for an empty chain or a non-positive sigma.
PredictabilitySurface build_surface(const OptionChain& chain, double rate,
                                    const vol::VolEstimate& vol, const SolverOptions& opts = {});

struct DiffPoint {
    double moneyness = 0.0;
    double tau = 0.0;
    double dp = 0.0;  // p_other - p_base
};

struct SurfaceDiff {
    vol::VolMethod base = vol::VolMethod::realized;
    vol::VolMethod other = vol::VolMethod::vix;
    std::vector<DiffPoint> points;

    /// e.g. "vix-realized"
    std::string label() const;
};

/// p_other - p_base on the grid points both surfaces share, in base order.
/// Throws InputError when spot, rate or as_of differ, or nothing overlaps.
SurfaceDiff surface_diff(const PredictabilitySurface& base, const PredictabilitySurface& other);

}  // namespace predbs::calib
