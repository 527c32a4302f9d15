#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "predbs/dates.hpp"
#include "predbs/error.hpp"

namespace predbs::vol {

/// Calendar-day annualization factor sqrt(365), applied to every estimator.
inline constexpr double kDaysPerYear = 365.0;

/// Daily log-returns R(t) = ln(S(t) / S(t - 1)), one per date, dates ascending.
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> returns;

    std::size_t size() const noexcept { return returns.size(); }
};

/// Throws InputError unless dates are strictly ascending, sizes match,
/// returns are finite and there are at least two of them.
void validate(const ReturnSeries& series);

enum class VolMethod { vix, historical, realized, garch };

std::string_view to_string(VolMethod m);
std::optional<VolMethod> parse_vol_method(std::string_view name);

struct VolEstimate {
    VolMethod method = VolMethod::historical;
    double sigma_annual = 0.0;  // per sqrt-year
    double sigma_daily = 0.0;   // per sqrt-day; sigma_annual = sigma_daily * sqrt(365)
    std::size_t window = 0;     // trading days used (0 for a VIX quote)
    std::optional<Date> as_of;
};

/// Mean-subtracted sample standard deviation (divisor n - 1) of the last `window` returns.
VolEstimate historical_vol(const ReturnSeries& series, std::size_t window);

/// Root mean square of the last `window` returns, no mean subtraction.
VolEstimate realized_vol(const ReturnSeries& series, std::size_t window);

/// VIX quotes are annualized percentage points: sigma_annual = vix / 100.
VolEstimate vix_to_sigma(double vix_quote, std::optional<Date> as_of = std::nullopt);

/// AR(1) mean with GARCH(1,1) variance and standardized Student-t innovations:
///   R_t = mu0 + phi R_{t-1} + eps_t,  eps_t = sigma_t z_t,
///   sigma_t^2 = omega + alpha1 eps_{t-1}^2 + beta1 sigma_{t-1}^2.
struct GarchParams {
    double mu0 = 0.0;
    double phi = 0.0;
    double omega = 0.0;
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double nu = 8.0;
    double log_likelihood = 0.0;
};

/// Throws InputError unless omega > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1,
/// nu > 2 and |phi| < 1.
void validate(const GarchParams& params);

/// Fit failure. `best()` is the best point any start reached, if any.
class GarchEstimationError : public Error {
  public:
    GarchEstimationError(const std::string& what, std::optional<GarchParams> best = std::nullopt)
        : Error(what), best_(best) {}
    const std::optional<GarchParams>& best() const noexcept { return best_; }

  private:
    std::optional<GarchParams> best_;
};

/// Conditional log-likelihood of `returns` (the first return is conditioned
/// on). The variance recursion starts at the mean squared residual.
double garch_log_likelihood(const GarchParams& params, const std::vector<double>& returns);

struct GarchFilter {
    std::vector<double> residuals;  // eps_t, t = 1 .. n-1
    std::vector<double> variances;  // sigma_t^2, t = 1 .. n-1
    double next_variance = 0.0;     // sigma_{n}^2, one step ahead
};

GarchFilter garch_filter(const GarchParams& params, const std::vector<double>& returns);

struct GarchFitOptions {
    std::size_t max_iterations = 4000;  // per simplex run
    double simplex_tolerance = 1e-5;    // characteristic simplex size at convergence
    double value_tolerance = 1e-10;     // relative improvement that resets the stall counter
    std::size_t stall_iterations = 200;
};

struct GarchStart {
    GarchParams initial;     // log_likelihood filled in
    GarchParams optimum;     // log_likelihood filled in
    bool converged = false;
    bool admissible = false; // optimum satisfies the stationarity constraints
};

struct GarchFitReport {
    GarchParams best;
    std::size_t best_start = 0;
    std::vector<GarchStart> starts;
};

/// Multi-start Nelder-Mead maximum likelihood. Requires >= 250 returns.
/// Throws GarchEstimationError for degenerate data or when no start both
/// converges and lands on an admissible point.
GarchFitReport fit_ar_garch_report(const ReturnSeries& series, const GarchFitOptions& opts = {});
GarchParams fit_ar_garch(const ReturnSeries& series, const GarchFitOptions& opts = {});

/// One-step-ahead conditional standard deviation from the filtered recursion.
VolEstimate garch_forecast_vol(const GarchParams& params, const ReturnSeries& series);

struct GarchSimulation {
    std::vector<double> returns;
    double next_sigma = 0.0;  // true sigma_{n} of the data-generating process
};

/// Simulates `n` returns (after `burn_in` discarded draws) from the model.
GarchSimulation simulate_ar_garch(const GarchParams& params, std::size_t n, std::uint64_t seed,
                                  std::size_t burn_in = 1000);

struct VrpResult {
    double implied_variance = 0.0;   // annualized
    double realized_variance = 0.0;  // annualized
    double vrp = 0.0;                // implied - realized
};

VrpResult variance_risk_premium_from_variances(double implied_variance, double realized_variance);

/// implied = (vix / 100)^2, realized = sigma_annual^2 of the realized estimate.
VrpResult variance_risk_premium(double vix_quote, const VolEstimate& realized);

/// implied = (vix / 100)^2, realized = 365 * mean of squared returns over `window`.
VrpResult variance_risk_premium(double vix_quote, const ReturnSeries& series, std::size_t window);

}  // namespace predbs::vol
