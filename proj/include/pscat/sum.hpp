#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pscat {

// Pairwise (tree) summation. Fixed association order, so results are
// bit-identical for a given input sequence no matter how callers parallelize
// the production of that sequence.
template <class T>
T pairwise_sum(std::span<const T> values) {
    const std::size_t n = values.size();
    if (n == 0) return T{};
    if (n <= 8) {
        T acc = values[0];
        for (std::size_t i = 1; i < n; ++i) acc += values[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& values) {
    return pairwise_sum(std::span<const T>(values.data(), values.size()));
}

} // namespace pscat
