#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace predbs::sde {

/// Brownian motion sampled on a uniform grid 0 = t0 < ... < tk = T with B(t0) = 0.
class BrownianPath {
  public:
    /// Seeded path with i.i.d. Normal(0, dt) increments. `substream` selects
    /// an independent stream under the same master seed.
    static BrownianPath generate(double horizon, std::size_t steps, std::uint64_t seed,
                                 std::uint64_t substream = 0);

    /// Validates a stored path: at least two points, strictly increasing
    /// uniform times starting at 0, values[0] == 0, all finite.
    static BrownianPath from_samples(std::vector<double> times, std::vector<double> values);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t steps() const noexcept { return times_.size() - 1; }
    double horizon() const noexcept { return times_.back(); }
    double dt() const noexcept { return times_[1] - times_[0]; }

    /// Every `stride`-th point; steps() must be divisible by stride.
    BrownianPath subsample(std::size_t stride) const;

    /// Linear interpolation between grid values (exact on grid points).
    double at(double t) const;

  private:
    BrownianPath(std::vector<double> times, std::vector<double> values)
        : times_(std::move(times)), values_(std::move(values)) {}

    std::vector<double> times_;
    std::vector<double> values_;
};

/// Integrand theta sampled on the grid of a companion BrownianPath, with an
/// evaluator for off-grid points t_j (1 - alpha) + alpha t_{j+1}.
class IntegrandPath {
  public:
    using Evaluator = std::function<double(double)>;

    /// Grid values with linear interpolation in between.
    IntegrandPath(std::vector<double> times, std::vector<double> values);

    /// Grid values plus an explicit evaluator for intermediate times.
    IntegrandPath(std::vector<double> times, std::vector<double> values, Evaluator evaluator);

    static IntegrandPath constant(const BrownianPath& grid, double c);

    /// theta(t) = B(t) using the path's own linear interpolation.
    static IntegrandPath of_brownian(const BrownianPath& b);

    /// theta(t) = fine(t): grid values taken from `fine` at the times of
    /// `grid`, off-grid points from `fine` as well.
    static IntegrandPath of_brownian(const BrownianPath& grid, const BrownianPath& fine);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double at(double t) const;

  private:
    std::vector<double> times_;
    std::vector<double> values_;
    Evaluator evaluator_;
};

/// sum_j theta(t_j) (B(t_{j+1}) - B(t_j))
double ito_integral(const IntegrandPath& theta, const BrownianPath& b);

/// sum_j theta((t_j + t_{j+1}) / 2) (B(t_{j+1}) - B(t_j))
double stratonovich_half_integral(const IntegrandPath& theta, const BrownianPath& b);

/// sum_j theta(t_j (1 - alpha) + alpha t_{j+1}) (B(t_{j+1}) - B(t_j)), alpha in [0, 1].
double stratonovich_alpha_integral(const IntegrandPath& theta, const BrownianPath& b, double alpha);

struct PathSimConfig {
    double mu = 0.0;       // drift per year
    double sigma = 0.0;    // volatility per sqrt-year
    double alpha = 0.0;    // Stratonovich parameter, [0, 1]
    double s0 = 100.0;
    double horizon = 1.0;  // years
    std::size_t steps = 252;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    bool keep_paths = false;
    unsigned threads = 0;  // 0: hardware concurrency; never affects results
};

void validate(const PathSimConfig& cfg);

struct PathBatch {
    PathSimConfig config;
    double drift = 0.0;                // effective Ito drift used
    std::vector<double> terminal;      // S(T) per path
    std::vector<double> log_returns;   // ln(S(T) / S0) per path
    std::vector<double> paths;         // row-major [path][step], only if keep_paths
};

/// dS = mu S dt + sigma S dB, simulated with the exact log-normal step.
PathBatch simulate_ito_gbm(const PathSimConfig& cfg);

/// dS = mu S dt + sigma S o^(alpha) dB, i.e. the Ito GBM with drift mu + alpha sigma^2.
PathBatch simulate_stratonovich_alpha(const PathSimConfig& cfg);

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

/// e^{-r tau} E[max(S(T) - K, 0)] with S following the risk-neutral GBM
/// whose drift is r - p sigma^2.
McEstimate mc_risk_neutral_call(double s0, double strike, double tau, double rate, double sigma,
                                double p, std::size_t paths, std::uint64_t seed);

/// Seed of the independent generator for path `index` under `master`.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace predbs::sde
