#include "xirpaug/app/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "xirpaug/app/csv.hpp"
#include "xirpaug/error.hpp"
#include "xirpaug/format.hpp"

namespace xirpaug::app {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
         "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n<title>" + escape(title) + "</title>\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axis_text(double x, double y, const std::string& text, const char* anchor = "middle") {
  return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"" +
         anchor + "\">" + escape(text) + "</text>\n";
}

}  // namespace

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw Error(Errc::EmptyInput, "histogram of no values");
  if (bins == 0) throw Error(Errc::InvalidRange, "histogram needs at least one bin");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  Histogram h;
  if (!(*mx > *mn)) {
    h.lo = {*mn - 0.5};
    h.hi = {*mn + 0.5};
    h.counts = {values.size()};
    return h;
  }
  const double width = (*mx - *mn) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    h.lo.push_back(*mn + width * static_cast<double>(b));
    h.hi.push_back(b + 1 == bins ? *mx : *mn + width * static_cast<double>(b + 1));
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - *mn) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

Histogram level_histogram(std::span<const double> values, std::span<const double> levels) {
  if (values.empty()) throw Error(Errc::EmptyInput, "histogram of no values");
  if (levels.empty()) throw Error(Errc::EmptyInput, "no histogram levels");
  std::vector<double> lv(levels.begin(), levels.end());
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  double spacing = 1.0;
  if (lv.size() > 1) {
    spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < lv.size(); ++i) spacing = std::min(spacing, lv[i] - lv[i - 1]);
  }
  Histogram h;
  h.counts.assign(lv.size(), 0);
  for (double l : lv) {
    h.lo.push_back(l - spacing / 2.0);
    h.hi.push_back(l + spacing / 2.0);
  }
  for (double v : values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < lv.size(); ++i) {
      if (std::abs(v - lv[i]) < std::abs(v - lv[best])) best = i;
    }
    h.counts[best] += 1;
  }
  return h;
}

void write_histogram(const std::filesystem::path& dir, const std::string& stem, const std::string& x_label,
                     const Histogram& h) {
  std::string csv = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    csv += format_double(h.lo[i]) + ',' + format_double(h.hi[i]) + ',' + std::to_string(h.counts[i]) + '\n';
  }

  const double x0 = h.lo.front();
  const double x1 = h.hi.back();
  const double max_count = static_cast<double>(std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end())));
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto sx = [&](double v) { return kMargin + (v - x0) / (x1 - x0) * plot_w; };

  std::string svg = svg_open(stem);
  svg += "<line x1=\"" + px(kMargin) + "\" y1=\"" + px(kHeight - kMargin) + "\" x2=\"" + px(kWidth - kMargin) + "\" y2=\"" +
         px(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + px(kMargin) + "\" y1=\"" + px(kMargin) + "\" x2=\"" + px(kMargin) + "\" y2=\"" +
         px(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double bh = static_cast<double>(h.counts[i]) / max_count * plot_h;
    svg += "<rect class=\"bar\" x=\"" + px(sx(h.lo[i])) + "\" y=\"" + px(kHeight - kMargin - bh) + "\" width=\"" +
           px(sx(h.hi[i]) - sx(h.lo[i])) + "\" height=\"" + px(bh) +
           "\" fill=\"steelblue\" stroke=\"white\" data-lo=\"" + format_double(h.lo[i]) + "\" data-hi=\"" +
           format_double(h.hi[i]) + "\" data-count=\"" + std::to_string(h.counts[i]) + "\"/>\n";
  }
  svg += axis_text(kMargin, kHeight - kMargin + 15, format_short(x0));
  svg += axis_text(kWidth - kMargin, kHeight - kMargin + 15, format_short(x1));
  if (x0 < 0.0 && x1 > 0.0) {
    svg += "<line x1=\"" + px(sx(0.0)) + "\" y1=\"" + px(kMargin) + "\" x2=\"" + px(sx(0.0)) + "\" y2=\"" +
           px(kHeight - kMargin) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    svg += axis_text(sx(0.0), kHeight - kMargin + 15, "0");
  }
  svg += axis_text(kWidth / 2, kHeight - 12, x_label);
  svg += axis_text(kMargin - 8, kMargin + 4, std::to_string(static_cast<std::size_t>(max_count)), "end");
  svg += "</svg>\n";

  write_atomic(dir / (stem + ".csv"), csv);
  write_atomic(dir / (stem + ".svg"), svg);
}

void write_beeswarm(const std::filesystem::path& dir, const std::string& stem,
                    const shapley::AttributionReport& report) {
  if (report.phi.rows() == 0 || report.order.empty()) throw Error(Errc::EmptyInput, "empty attribution report");
  const double phi_max = std::max(report.phi.cwiseAbs().maxCoeff(), 1e-12);
  const double plot_w = kWidth - 2 * kMargin - 60.0;
  const double left = kMargin + 60.0;
  const double row_h = (kHeight - 2 * kMargin) / static_cast<double>(report.order.size());
  auto sx = [&](double v) { return left + (v + phi_max) / (2 * phi_max) * plot_w; };

  std::string csv = "feature,dataset_id,phi,feature_z,row\n";
  std::string svg = svg_open(stem);
  svg += "<line x1=\"" + px(sx(0.0)) + "\" y1=\"" + px(kMargin) + "\" x2=\"" + px(sx(0.0)) + "\" y2=\"" +
         px(kHeight - kMargin) + "\" stroke=\"gray\"/>\n";
  for (std::size_t k = 0; k < report.order.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(report.order[k]);
    const double cy = kMargin + row_h * (static_cast<double>(k) + 0.5);
    svg += axis_text(left - 6, cy + 4, report.feature_names[report.order[k]], "end");

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(report.phi.rows()));
    for (Eigen::Index r = 0; r < report.phi.rows(); ++r) rows[static_cast<std::size_t>(r)] = r;
    std::stable_sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) { return report.phi(a, j) < report.phi(b, j); });
    for (std::size_t q = 0; q < rows.size(); ++q) {
      const Eigen::Index r = rows[q];
      const double phi = report.phi(r, j);
      const double z = report.standardized(r, j);
      const double t = std::clamp((z + 2.0) / 4.0, 0.0, 1.0);
      const int red = static_cast<int>(std::lround(255 * t));
      const int blue = 255 - red;
      const double jitter = (static_cast<double>(q % 7) - 3.0) * row_h * 0.1;
      const std::string& id = report.dataset_ids[static_cast<std::size_t>(r)];
      csv += report.feature_names[report.order[k]] + ',' + id + ',' + format_double(phi) + ',' + format_double(z) + ',' +
             std::to_string(k) + '\n';
      svg += "<circle cx=\"" + px(sx(phi)) + "\" cy=\"" + px(cy + jitter) + "\" r=\"3\" fill=\"rgb(" + std::to_string(red) +
             ",0," + std::to_string(blue) + ")\" data-feature=\"" + escape(report.feature_names[report.order[k]]) +
             "\" data-id=\"" + escape(id) + "\" data-phi=\"" + format_double(phi) + "\" data-z=\"" + format_double(z) + "\"/>\n";
    }
  }
  svg += axis_text(kWidth / 2, kHeight - 12, "Shapley value (" + report.target + ")");
  svg += "</svg>\n";
  write_atomic(dir / (stem + ".csv"), csv);
  write_atomic(dir / (stem + ".svg"), svg);
}

std::vector<std::string> emit_plots(std::span<const eval::ScoreRecord> records,
                                    std::span<const shapley::AttributionReport> reports,
                                    const std::filesystem::path& dir) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no score records to plot");
  std::vector<std::string> stems;
  std::map<std::string, std::vector<const eval::ScoreRecord*>> groups;
  for (const auto& r : records) {
    groups["all"].push_back(&r);
    groups[r.frequency].push_back(&r);
  }
  for (const auto& [freq, members] : groups) {
    std::vector<double> s_a;
    std::vector<double> level;
    for (const auto* r : members) {
      s_a.push_back(r->s_a);
      level.push_back(r->optimal_level());
    }
    const std::string sa_stem = "hist_s_a_" + freq;
    write_histogram(dir, sa_stem, "s_a", histogram(s_a));
    stems.push_back(sa_stem);

    std::vector<double> levels = members.front()->alphas;
    if (levels.empty()) levels = level;
    const std::string lv_stem = "hist_alpha_star_" + freq;
    write_histogram(dir, lv_stem, "alpha*", level_histogram(level, levels));
    stems.push_back(lv_stem);
  }
  for (const auto& rep : reports) {
    const std::string stem = "beeswarm_" + rep.target;
    write_beeswarm(dir, stem, rep);
    stems.push_back(stem);
  }
  return stems;
}

}  // namespace xirpaug::app
