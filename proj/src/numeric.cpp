#include "predbs/numeric.hpp"

#include <cmath>
#include <vector>

namespace predbs {

namespace {

constexpr std::size_t kPairwiseBlock = 32;

double pairwise_sum_impl(const double* data, std::size_t n) {
    if (n <= kPairwiseBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

SampleMoments sample_moments(std::span<const double> values) {
    SampleMoments m;
    m.count = values.size();
    if (values.empty()) return m;

    const double shift = values.front();
    std::vector<double> centred(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) centred[i] = values[i] - shift;
    const double centred_mean = pairwise_sum(centred) / static_cast<double>(values.size());
    m.mean = shift + centred_mean;

    if (values.size() < 2) return m;
    for (auto& c : centred) {
        const double d = c - centred_mean;
        c = d * d;
    }
    m.variance = pairwise_sum(centred) / static_cast<double>(values.size() - 1);
    m.std_error = std::sqrt(m.variance / static_cast<double>(values.size()));
    return m;
}

}  // namespace predbs
