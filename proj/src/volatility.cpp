#include "predbs/volatility.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>

#include "predbs/numeric.hpp"

namespace predbs::vol {

namespace {

const double kSqrtDays = std::sqrt(kDaysPerYear);

std::span<const double> tail(const ReturnSeries& series, std::size_t window) {
    validate(series);
    if (window < 2) throw InputError("estimation window must be at least 2 returns");
    if (window > series.size()) {
        throw InputError("estimation window (" + std::to_string(window) +
                         ") exceeds series length (" + std::to_string(series.size()) + ")");
    }
    return std::span<const double>(series.returns).subspan(series.size() - window);
}

VolEstimate make_estimate(VolMethod method, double sigma_daily, std::size_t window,
                          std::optional<Date> as_of) {
    VolEstimate e;
    e.method = method;
    e.sigma_daily = sigma_daily;
    e.sigma_annual = sigma_daily * kSqrtDays;
    e.window = window;
    e.as_of = as_of;
    return e;
}

double mean_of_squares(std::span<const double> xs) {
    std::vector<double> sq(xs.size());
    std::transform(xs.begin(), xs.end(), sq.begin(), [](double x) { return x * x; });
    return pairwise_sum(sq) / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------------------
// GARCH likelihood

constexpr std::size_t kParams = 6;
using Vec = std::array<double, kParams>;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr double kMaxPersistence = 0.9999;
constexpr double kMinNu = 2.05;
constexpr double kMaxNu = 500.0;

/// Unconstrained coordinates for the simplex search. Scales come from the
/// data so the simplex starts roughly isotropic.
struct Transform {
    double mean_scale;
    double var_scale;

    GarchParams to_params(const Vec& x) const {
        GarchParams g;
        g.mu0 = x[0] * mean_scale;
        g.phi = std::tanh(x[1]);
        g.omega = std::exp(x[2]) * var_scale;
        const double persistence = kMaxPersistence * logistic(x[3]);
        const double share = logistic(x[4]);
        g.alpha1 = persistence * share;
        g.beta1 = persistence * (1.0 - share);
        g.nu = std::min(kMinNu + std::exp(x[5]), kMaxNu);
        return g;
    }

    Vec from_params(const GarchParams& g) const {
        const double persistence = g.alpha1 + g.beta1;
        return {g.mu0 / mean_scale,
                std::atanh(g.phi),
                std::log(g.omega / var_scale),
                logit(persistence / kMaxPersistence),
                logit(g.alpha1 / persistence),
                std::log(g.nu - kMinNu)};
    }
};

double log_likelihood_impl(const GarchParams& g, std::span<const double> r) {
    const std::size_t n = r.size();
    std::vector<double> eps(n - 1);
    for (std::size_t t = 1; t < n; ++t) eps[t - 1] = r[t] - g.mu0 - g.phi * r[t - 1];
    const double backcast = mean_of_squares(eps);
    if (!(backcast > 0.0)) return -std::numeric_limits<double>::infinity();

    const double nu = g.nu;
    const double log_const = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                             0.5 * std::log(std::numbers::pi * (nu - 2.0));
    std::vector<double> terms(eps.size());
    double var = backcast;
    double prev_eps2 = backcast;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        var = g.omega + g.alpha1 * prev_eps2 + g.beta1 * var;
        const double e2 = eps[t] * eps[t];
        terms[t] = log_const - 0.5 * std::log(var) -
                   0.5 * (nu + 1.0) * std::log1p(e2 / ((nu - 2.0) * var));
        prev_eps2 = e2;
    }
    const double ll = pairwise_sum(terms);
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

struct Objective {
    Transform transform;
    std::span<const double> returns;
};

double negative_log_likelihood(const gsl_vector* v, void* data) {
    const auto* obj = static_cast<const Objective*>(data);
    Vec x;
    for (std::size_t i = 0; i < kParams; ++i) x[i] = gsl_vector_get(v, i);
    const double ll = log_likelihood_impl(obj->transform.to_params(x), obj->returns);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;

struct SimplexResult {
    Vec x;
    double value;
    bool converged;
};

SimplexResult run_simplex(const Objective& obj, const Vec& start, double step,
                          const GarchFitOptions& opts) {
    VectorPtr x(gsl_vector_alloc(kParams));
    VectorPtr steps(gsl_vector_alloc(kParams));
    for (std::size_t i = 0; i < kParams; ++i) gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set_all(steps.get(), step);

    gsl_multimin_function fn;
    fn.n = kParams;
    fn.f = &negative_log_likelihood;
    fn.params = const_cast<Objective*>(&obj);

    MinimizerPtr m(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, kParams));
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), steps.get());

    // a simplex straddling a saturated logistic never shrinks, so a run whose
    // best value stops moving also counts as converged
    bool converged = false;
    double anchor = m->fval;
    std::size_t anchor_iter = 0;
    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        const double size = gsl_multimin_fminimizer_size(m.get());
        if (gsl_multimin_test_size(size, opts.simplex_tolerance) == GSL_SUCCESS) {
            converged = true;
            break;
        }
        if (anchor - m->fval > opts.value_tolerance * (1.0 + std::abs(m->fval))) {
            anchor = m->fval;
            anchor_iter = iter;
        } else if (iter - anchor_iter >= opts.stall_iterations) {
            converged = true;
            break;
        }
    }
    SimplexResult r;
    for (std::size_t i = 0; i < kParams; ++i) r.x[i] = gsl_vector_get(m->x, i);
    r.value = m->fval;
    r.converged = converged;
    return r;
}

bool admissible(const GarchParams& g) {
    return std::isfinite(g.log_likelihood) && g.omega > 0.0 && g.alpha1 >= 0.0 && g.beta1 >= 0.0 &&
           g.alpha1 + g.beta1 < 1.0 && g.nu > 2.0 && std::abs(g.phi) < 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------

void validate(const ReturnSeries& series) {
    if (series.dates.size() != series.returns.size()) {
        throw InputError("return series dates and values differ in length");
    }
    if (series.returns.empty()) throw InputError("return series is empty");
    for (std::size_t i = 0; i < series.returns.size(); ++i) {
        if (!std::isfinite(series.returns[i])) throw InputError("return series contains non-finite values");
        if (i > 0 && !(series.dates[i - 1] < series.dates[i])) {
            throw InputError("return series dates must be strictly ascending");
        }
    }
}

std::string_view to_string(VolMethod m) {
    switch (m) {
        case VolMethod::vix: return "vix";
        case VolMethod::historical: return "historical";
        case VolMethod::realized: return "realized";
        case VolMethod::garch: return "garch";
    }
    return "unknown";
}

std::optional<VolMethod> parse_vol_method(std::string_view name) {
    for (auto m : {VolMethod::vix, VolMethod::historical, VolMethod::realized, VolMethod::garch}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

VolEstimate historical_vol(const ReturnSeries& series, std::size_t window) {
    const auto xs = tail(series, window);
    const SampleMoments m = sample_moments(xs);
    return make_estimate(VolMethod::historical, std::sqrt(m.variance), window, series.dates.back());
}

VolEstimate realized_vol(const ReturnSeries& series, std::size_t window) {
    const auto xs = tail(series, window);
    return make_estimate(VolMethod::realized, std::sqrt(mean_of_squares(xs)), window,
                         series.dates.back());
}

VolEstimate vix_to_sigma(double vix_quote, std::optional<Date> as_of) {
    if (!(vix_quote >= 0.0) || !std::isfinite(vix_quote)) {
        throw InputError("VIX quote must be finite and non-negative");
    }
    VolEstimate e;
    e.method = VolMethod::vix;
    e.sigma_annual = vix_quote / 100.0;
    e.sigma_daily = e.sigma_annual / kSqrtDays;
    e.window = 0;
    e.as_of = as_of;
    return e;
}

void validate(const GarchParams& g) {
    if (!(g.omega > 0.0)) throw InputError("GARCH omega must be positive");
    if (!(g.alpha1 >= 0.0) || !(g.beta1 >= 0.0)) throw InputError("GARCH alpha1, beta1 must be >= 0");
    if (!(g.alpha1 + g.beta1 < 1.0)) throw InputError("GARCH alpha1 + beta1 must be < 1");
    if (!(g.nu > 2.0)) throw InputError("Student-t degrees of freedom must exceed 2");
    if (!(std::abs(g.phi) < 1.0)) throw InputError("AR coefficient must satisfy |phi| < 1");
    if (!std::isfinite(g.mu0)) throw InputError("GARCH mean must be finite");
}

double garch_log_likelihood(const GarchParams& params, const std::vector<double>& returns) {
    validate(params);
    if (returns.size() < 3) throw InputError("need at least three returns");
    return log_likelihood_impl(params, returns);
}

GarchFilter garch_filter(const GarchParams& g, const std::vector<double>& r) {
    validate(g);
    if (r.size() < 2) throw InputError("need at least two returns");
    GarchFilter f;
    f.residuals.resize(r.size() - 1);
    for (std::size_t t = 1; t < r.size(); ++t) f.residuals[t - 1] = r[t] - g.mu0 - g.phi * r[t - 1];
    const double backcast = mean_of_squares(f.residuals);
    f.variances.resize(f.residuals.size());
    double var = backcast;
    double prev_eps2 = backcast;
    for (std::size_t t = 0; t < f.residuals.size(); ++t) {
        var = g.omega + g.alpha1 * prev_eps2 + g.beta1 * var;
        f.variances[t] = var;
        prev_eps2 = f.residuals[t] * f.residuals[t];
    }
    f.next_variance = g.omega + g.alpha1 * prev_eps2 + g.beta1 * var;
    return f;
}

GarchFitReport fit_ar_garch_report(const ReturnSeries& series, const GarchFitOptions& opts) {
    validate(series);
    if (series.size() < 250) throw InputError("AR-GARCH fit needs at least 250 returns");
    const auto& r = series.returns;

    const SampleMoments m = sample_moments(r);
    if (!(m.variance > 0.0)) {
        throw GarchEstimationError("degenerate likelihood: return series has zero variance");
    }
    const Objective obj{Transform{std::sqrt(m.variance), m.variance}, r};

    // lag-one autocorrelation as the AR starting value
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < r.size(); ++t) num += (r[t] - m.mean) * (r[t - 1] - m.mean);
    for (double x : r) den += (x - m.mean) * (x - m.mean);
    const double phi0 = std::clamp(num / den, -0.5, 0.5);
    const double mu0 = m.mean * (1.0 - phi0);

    struct Seed {
        double alpha1, beta1, nu;
    };
    constexpr std::array<Seed, 4> seeds{{{0.05, 0.90, 8.0}, {0.10, 0.80, 5.0},
                                         {0.03, 0.95, 12.0}, {0.15, 0.60, 30.0}}};

    GarchFitReport report;
    std::optional<GarchParams> best_any;
    bool have_best = false;
    for (const Seed& s : seeds) {
        GarchStart start;
        start.initial.mu0 = mu0;
        start.initial.phi = phi0;
        start.initial.alpha1 = s.alpha1;
        start.initial.beta1 = s.beta1;
        start.initial.omega = m.variance * (1.0 - s.alpha1 - s.beta1);
        start.initial.nu = s.nu;
        start.initial.log_likelihood = log_likelihood_impl(start.initial, r);

        // second pass restarts the simplex at the first optimum, the usual
        // remedy for Nelder-Mead stalling on a collapsed simplex
        SimplexResult res = run_simplex(obj, obj.transform.from_params(start.initial), 0.5, opts);
        res = run_simplex(obj, res.x, 0.1, opts);

        start.optimum = obj.transform.to_params(res.x);
        start.optimum.log_likelihood = log_likelihood_impl(start.optimum, r);
        start.converged = res.converged;
        start.admissible = admissible(start.optimum);

        if (start.admissible &&
            (!best_any || start.optimum.log_likelihood > best_any->log_likelihood)) {
            best_any = start.optimum;
        }
        if (start.converged && start.admissible &&
            (!have_best || start.optimum.log_likelihood > report.best.log_likelihood)) {
            report.best = start.optimum;
            report.best_start = report.starts.size();
            have_best = true;
        }
        report.starts.push_back(start);
    }
    if (!have_best) {
        throw GarchEstimationError("AR-GARCH fit did not converge from any start", best_any);
    }
    return report;
}

GarchParams fit_ar_garch(const ReturnSeries& series, const GarchFitOptions& opts) {
    return fit_ar_garch_report(series, opts).best;
}

VolEstimate garch_forecast_vol(const GarchParams& params, const ReturnSeries& series) {
    validate(series);
    const GarchFilter f = garch_filter(params, series.returns);
    return make_estimate(VolMethod::garch, std::sqrt(f.next_variance), series.size(),
                         series.dates.back());
}

GarchSimulation simulate_ar_garch(const GarchParams& g, std::size_t n, std::uint64_t seed,
                                  std::size_t burn_in) {
    validate(g);
    if (n < 2) throw InputError("simulate at least two returns");
    std::mt19937_64 rng(seed);
    std::student_t_distribution<double> student(g.nu);
    const double scale = std::sqrt((g.nu - 2.0) / g.nu);

    double var = g.omega / (1.0 - g.alpha1 - g.beta1);
    double eps = 0.0;
    double prev = g.mu0 / (1.0 - g.phi);
    GarchSimulation sim;
    sim.returns.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        var = g.omega + g.alpha1 * eps * eps + g.beta1 * var;
        eps = std::sqrt(var) * scale * student(rng);
        const double ret = g.mu0 + g.phi * prev + eps;
        prev = ret;
        if (t >= burn_in) sim.returns.push_back(ret);
    }
    sim.next_sigma = std::sqrt(g.omega + g.alpha1 * eps * eps + g.beta1 * var);
    return sim;
}

VrpResult variance_risk_premium_from_variances(double implied_variance, double realized_variance) {
    if (!std::isfinite(implied_variance) || !std::isfinite(realized_variance)) {
        throw InputError("variance legs must be finite");
    }
    return {implied_variance, realized_variance, implied_variance - realized_variance};
}

VrpResult variance_risk_premium(double vix_quote, const VolEstimate& realized) {
    const double implied = vix_to_sigma(vix_quote).sigma_annual;
    return variance_risk_premium_from_variances(implied * implied,
                                                realized.sigma_annual * realized.sigma_annual);
}

VrpResult variance_risk_premium(double vix_quote, const ReturnSeries& series, std::size_t window) {
    const double implied = vix_to_sigma(vix_quote).sigma_annual;
    const double realized = mean_of_squares(tail(series, window)) * kDaysPerYear;
    return variance_risk_premium_from_variances(implied * implied, realized);
}

}  // namespace predbs::vol
