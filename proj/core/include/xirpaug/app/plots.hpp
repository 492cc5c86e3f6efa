#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xirpaug/eval.hpp"
#include "xirpaug/shapley.hpp"

namespace xirpaug::app {

struct Histogram {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]. A single distinct value gets one bin of
/// width 1 centred on it. Throws EmptyInput.
[[nodiscard]] Histogram histogram(std::span<const double> values, std::size_t bins = 10);

/// One bin per level, centred on it, width = smallest level spacing. Values
/// are assigned to the nearest level.
[[nodiscard]] Histogram level_histogram(std::span<const double> values, std::span<const double> levels);

/// stem.csv (bin_lo,bin_hi,count) and stem.svg carrying the same numbers as
/// data attributes.
void write_histogram(const std::filesystem::path& dir, const std::string& stem, const std::string& x_label,
                     const Histogram& h);

/// stem.csv (feature,dataset_id,phi,feature_z,row) and stem.svg, one row of
/// points per feature in importance order.
void write_beeswarm(const std::filesystem::path& dir, const std::string& stem,
                    const shapley::AttributionReport& report);

/// Histograms of s_a and the optimal synthetic level per frequency and
/// pooled, plus one beeswarm per attribution report. Returns written stems.
std::vector<std::string> emit_plots(std::span<const eval::ScoreRecord> records,
                                    std::span<const shapley::AttributionReport> reports,
                                    const std::filesystem::path& dir);

}  // namespace xirpaug::app
