#include "predbs/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "predbs/error.hpp"
#include "predbs/numeric.hpp"

namespace predbs::sde {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<double> uniform_grid(double horizon, std::size_t steps) {
    std::vector<double> t(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        t[j] = horizon * static_cast<double>(j) / static_cast<double>(steps);
    }
    return t;
}

double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    if (times[lo] == t) return values[lo];
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

void check_grids(const IntegrandPath& theta, const BrownianPath& b) {
    if (theta.values().size() != b.values().size() || theta.times().size() != b.times().size()) {
        throw InputError("integrand and Brownian path grids differ in length");
    }
}

template <class Point>
double riemann_sum(const IntegrandPath& theta, const BrownianPath& b, Point point) {
    check_grids(theta, b);
    const auto& t = b.times();
    const auto& w = b.values();
    std::vector<double> terms(b.steps());
    for (std::size_t j = 0; j < terms.size(); ++j) {
        terms[j] = theta.at(point(t[j], t[j + 1])) * (w[j + 1] - w[j]);
    }
    return pairwise_sum(terms);
}

template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n / 1024, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
}

PathBatch simulate_with_drift(const PathSimConfig& cfg, double drift) {
    PathBatch batch;
    batch.config = cfg;
    batch.drift = drift;
    batch.terminal.resize(cfg.paths);
    batch.log_returns.resize(cfg.paths);
    if (cfg.keep_paths) batch.paths.resize(cfg.paths * (cfg.steps + 1));

    const double dt = cfg.horizon / static_cast<double>(cfg.steps);
    const double sd = std::sqrt(dt);
    const double log_drift = drift - 0.5 * cfg.sigma * cfg.sigma;

    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        std::mt19937_64 rng(substream_seed(cfg.seed, i));
        std::normal_distribution<double> normal(0.0, sd);
        double b = 0.0;
        double* row = cfg.keep_paths ? &batch.paths[i * (cfg.steps + 1)] : nullptr;
        if (row) row[0] = cfg.s0;
        for (std::size_t j = 1; j <= cfg.steps; ++j) {
            b += normal(rng);
            if (row) {
                const double t = cfg.horizon * static_cast<double>(j) / static_cast<double>(cfg.steps);
                row[j] = cfg.s0 * std::exp(log_drift * t + cfg.sigma * b);
            }
        }
        const double log_ret = log_drift * cfg.horizon + cfg.sigma * b;
        batch.log_returns[i] = log_ret;
        batch.terminal[i] = cfg.s0 * std::exp(log_ret);
    });
    return batch;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// ---------------------------------------------------------------------------
// BrownianPath

BrownianPath BrownianPath::generate(double horizon, std::size_t steps, std::uint64_t seed,
                                    std::uint64_t substream) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
    if (steps == 0) throw InputError("need at least one step");
    std::mt19937_64 rng(substream_seed(seed, substream));
    std::normal_distribution<double> normal(0.0, std::sqrt(horizon / static_cast<double>(steps)));
    std::vector<double> values(steps + 1, 0.0);
    for (std::size_t j = 1; j <= steps; ++j) values[j] = values[j - 1] + normal(rng);
    return BrownianPath(uniform_grid(horizon, steps), std::move(values));
}

BrownianPath BrownianPath::from_samples(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size()) throw InputError("times and values differ in length");
    if (times.size() < 2) throw InputError("a Brownian path needs at least two points");
    if (times.front() != 0.0) throw InputError("Brownian path must start at t = 0");
    if (values.front() != 0.0) throw InputError("Brownian path must start at B = 0");
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!std::isfinite(times[j]) || !std::isfinite(values[j])) {
            throw InputError("Brownian path contains non-finite values");
        }
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw InputError("Brownian path times must be strictly increasing");
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double step = times[j] - times[j - 1];
        if (!(step > 0.0)) throw InputError("Brownian path times must be strictly increasing");
        if (std::abs(step - dt) > 1e-9 * dt) throw InputError("Brownian path grid must be uniform");
    }
    return BrownianPath(std::move(times), std::move(values));
}

BrownianPath BrownianPath::subsample(std::size_t stride) const {
    if (stride == 0 || steps() % stride != 0) {
        throw InputError("subsample stride must divide the number of steps");
    }
    std::vector<double> t, v;
    t.reserve(steps() / stride + 1);
    v.reserve(steps() / stride + 1);
    for (std::size_t j = 0; j <= steps(); j += stride) {
        t.push_back(times_[j]);
        v.push_back(values_[j]);
    }
    return BrownianPath(std::move(t), std::move(v));
}

double BrownianPath::at(double t) const { return interpolate(times_, values_, t); }

// ---------------------------------------------------------------------------
// IntegrandPath

IntegrandPath::IntegrandPath(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.empty()) {
        throw InputError("integrand times and values differ in length");
    }
}

IntegrandPath::IntegrandPath(std::vector<double> times, std::vector<double> values,
                             Evaluator evaluator)
    : IntegrandPath(std::move(times), std::move(values)) {
    evaluator_ = std::move(evaluator);
}

IntegrandPath IntegrandPath::constant(const BrownianPath& grid, double c) {
    return IntegrandPath(grid.times(), std::vector<double>(grid.times().size(), c),
                         [c](double) { return c; });
}

IntegrandPath IntegrandPath::of_brownian(const BrownianPath& b) {
    return IntegrandPath(b.times(), b.values());
}

IntegrandPath IntegrandPath::of_brownian(const BrownianPath& grid, const BrownianPath& fine) {
    std::vector<double> v(grid.times().size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = fine.at(grid.times()[j]);
    return IntegrandPath(grid.times(), std::move(v), [fine](double t) { return fine.at(t); });
}

double IntegrandPath::at(double t) const {
    if (evaluator_) return evaluator_(t);
    return interpolate(times_, values_, t);
}

// ---------------------------------------------------------------------------
// Integrals

double ito_integral(const IntegrandPath& theta, const BrownianPath& b) {
    return riemann_sum(theta, b, [](double lo, double) { return lo; });
}

double stratonovich_half_integral(const IntegrandPath& theta, const BrownianPath& b) {
    return riemann_sum(theta, b, [](double lo, double hi) { return (lo + hi) / 2.0; });
}

double stratonovich_alpha_integral(const IntegrandPath& theta, const BrownianPath& b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
    return riemann_sum(theta, b,
                       [alpha](double lo, double hi) { return lo * (1.0 - alpha) + alpha * hi; });
}

// ---------------------------------------------------------------------------
// Simulation

void validate(const PathSimConfig& cfg) {
    if (!std::isfinite(cfg.mu)) throw InputError("mu must be finite");
    if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) throw InputError("sigma must be finite and >= 0");
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
    if (!(cfg.s0 > 0.0) || !std::isfinite(cfg.s0)) throw InputError("s0 must be positive");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw InputError("horizon must be positive");
    if (cfg.steps < 1) throw InputError("steps must be >= 1");
    if (cfg.paths < 1) throw InputError("paths must be >= 1");
}

PathBatch simulate_ito_gbm(const PathSimConfig& cfg) {
    validate(cfg);
    return simulate_with_drift(cfg, cfg.mu);
}

PathBatch simulate_stratonovich_alpha(const PathSimConfig& cfg) {
    validate(cfg);
    return simulate_with_drift(cfg, cfg.mu + cfg.alpha * cfg.sigma * cfg.sigma);
}

McEstimate mc_risk_neutral_call(double s0, double strike, double tau, double rate, double sigma,
                                double p, std::size_t paths, std::uint64_t seed) {
    for (double v : {s0, strike, tau, rate, sigma, p}) {
        if (!std::isfinite(v)) throw InputError("Monte Carlo inputs must be finite");
    }
    if (!(sigma >= 0.0)) throw InputError("sigma must be >= 0");
    if (!(tau > 0.0)) throw InputError("tau must be positive");
    if (!(strike > 0.0)) throw InputError("strike must be positive");
    if (!(p >= -1.0 && p <= 1.0)) throw InputError("excess predictability p must lie in [-1, 1]");

    PathSimConfig cfg;
    cfg.mu = rate - p * sigma * sigma;
    cfg.sigma = sigma;
    cfg.alpha = 0.0;
    cfg.s0 = s0;
    cfg.horizon = tau;
    cfg.steps = 1;
    cfg.paths = paths;
    cfg.seed = seed;
    const PathBatch batch = simulate_ito_gbm(cfg);

    const double discount = std::exp(-rate * tau);
    std::vector<double> payoff(batch.terminal.size());
    for (std::size_t i = 0; i < payoff.size(); ++i) {
        payoff[i] = discount * std::max(batch.terminal[i] - strike, 0.0);
    }
    const SampleMoments m = sample_moments(payoff);
    return {m.mean, m.std_error};
}

}  // namespace predbs::sde
