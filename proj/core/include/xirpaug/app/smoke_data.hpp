#pragma once

#include <cstdint>
#include <vector>

#include "xirpaug/series.hpp"

namespace xirpaug::app {

/// Six positive toy series of 200-400 points: three AR(1) log-return price
/// paths and three linear trends with AR(1) noise, ids D1-D3 and W1-W3.
[[nodiscard]] std::vector<series::TimeSeries> smoke_datasets(std::uint64_t seed);

}  // namespace xirpaug::app
