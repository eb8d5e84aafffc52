#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace traceguard {

struct EmptyHistory : std::runtime_error {
    EmptyHistory() : std::runtime_error("quantile of an empty history") {}
};

// Nearest-rank quantile: the element at rank ceil(q*n) of the ascending order,
// selected without a full sort. Shared by the continuous aggregation sensor
// and the detector's normal model.
template <typename T>
T nearest_rank_quantile(std::vector<T> values, double q) {
    if (values.empty()) throw EmptyHistory();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

}  // namespace traceguard
