#pragma once

#include <cstddef>
#include <span>

namespace predbs {

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length of `values`, so results do not depend on how they were produced.
double pairwise_sum(std::span<const double> values);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased, divisor n - 1 (0 when n < 2)
    double std_error = 0.0; // sqrt(variance / n)
    std::size_t count = 0;
};

/// Mean, sample variance and standard error of the mean. Values are shifted
/// by the first element before summing, so a constant sample yields that
/// constant exactly with zero variance.
SampleMoments sample_moments(std::span<const double> values);

}  // namespace predbs
