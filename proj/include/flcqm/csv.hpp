#pragma once

// CSV and plot-script writers. Numeric fields are formatted with %.9g so
// repeated runs with the same seed produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flcqm/scenario.hpp"

namespace flcqm {

class OutputError : public std::runtime_error {
 public:
  explicit OutputError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open output file: " + path);
  return out;
}

inline void write_dmr_csv(const std::string& path, const MetricsLog& log) {
  auto out = open_out(path);
  out << "source,interval_k,t_seconds,dmr,h_seconds,e,de,dh\n";
  for (const auto& r : log.rows) {
    out << r.source << ',' << r.k << ',' << fmt9(r.t_end) << ','
        << fmt9(r.dmr) << ',' << fmt9(r.h) << ',' << fmt9(r.e) << ','
        << fmt9(r.de) << ',' << fmt9(r.dh) << '\n';
  }
}

inline void write_summary_csv(const std::string& path,
                              const SummaryTable& table) {
  auto out = open_out(path);
  out << "source,interval_count,avg_dmr";
  const int segments = static_cast<int>(table.segment_bounds.size()) - 1;
  for (int i = 0; i < segments; ++i)
    out << ",avg_dmr_seg" << (i + 1);
  out << '\n';
  for (const auto& s : table.sources) {
    out << s.source << ',' << s.interval_count << ',' << fmt9(s.avg_dmr);
    for (int i = 0; i < segments; ++i) out << ',' << fmt9(s.segment_avg_dmr[i]);
    out << '\n';
  }
}

inline void write_surface_csv(const std::string& path,
                              const std::vector<FuzzyController::SurfacePoint>&
                                  points) {
  auto out = open_out(path);
  out << "e,de,dh\n";
  for (const auto& p : points)
    out << fmt9(p.e) << ',' << fmt9(p.de) << ',' << fmt9(p.dh) << '\n';
}

inline void write_compare_csv(const std::string& path,
                              const CompareReport& report) {
  auto out = open_out(path);
  out << "source,fixed_mean,fixed_spread,flc_mean,flc_spread,"
         "flc_to_fixed_ratio\n";
  for (const auto& r : report.sources) {
    out << r.source << ',' << fmt9(r.fixed_mean) << ',' << fmt9(r.fixed_spread)
        << ',' << fmt9(r.flc_mean) << ',' << fmt9(r.flc_spread) << ','
        << fmt9(r.flc_to_fixed_ratio) << '\n';
  }
}

// gnuplot script plotting per-source DMR and period time series from the
// dmr_*.csv files written next to it.
inline void write_plot_script(const std::string& path,
                              const std::vector<std::string>& schemes,
                              const std::vector<std::string>& sources) {
  auto out = open_out(path);
  out << "set datafile separator ','\n"
      << "set key outside\n"
      << "set xlabel 'time (s)'\n";
  for (const auto& scheme : schemes) {
    out << "set ylabel 'deadline miss ratio'\n"
        << "set yrange [0:1.05]\n"
        << "set title 'Deadline miss ratios (" << scheme << " scheme)'\n"
        << "plot ";
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (i) out << ", ";
      out << "'dmr_" << scheme << ".csv' using 3:($1 eq '" << sources[i]
          << "' ? $4 : NaN) with lines title '" << sources[i] << "'";
    }
    out << "\npause -1\n";
  }
  for (const auto& scheme : schemes) {
    if (scheme != "flc") continue;
    out << "set ylabel 'sampling period (s)'\n"
        << "set yrange [*:*]\n"
        << "set title 'Sampling periods (" << scheme << " scheme)'\n"
        << "plot ";
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (i) out << ", ";
      out << "'dmr_" << scheme << ".csv' using 3:($1 eq '" << sources[i]
          << "' ? $5 : NaN) with lines title '" << sources[i] << "'";
    }
    out << "\npause -1\n";
  }
}

}  // namespace flcqm
