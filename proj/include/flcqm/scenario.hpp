#pragma once

// The reference experiment: two actuators, four adaptive sources, one fixed
// interferer and one relay sharing a single collision domain, with the
// interferer switched on for [20, 40] s and two extra sources from 60 s.
// Runs either the fixed-period baseline or the adaptive scheme and reduces
// the per-interval log to whole-run and per-segment DMR averages.

#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "flcqm/sim.hpp"

namespace flcqm {

struct SourceSummary {
  std::string source;
  std::int64_t interval_count = 0;
  double avg_dmr = 0.0;                 // NaN when the source never ran
  std::vector<double> segment_avg_dmr;  // NaN for empty segments
  std::vector<std::int64_t> segment_interval_count;
};

struct SummaryTable {
  Scheme scheme = Scheme::fixed;
  std::uint64_t seed = 0;
  std::vector<double> segment_bounds;  // s, size = segments + 1
  std::vector<SourceSummary> sources;
};

inline ScenarioSpec build_paper_scenario(Scheme scheme, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scheme = scheme;
  spec.seed = seed;
  spec.end_time = 80.0;
  auto add = [&](int id, std::string name, NodeKind kind, bool active) {
    NodeSpec n;
    n.id = id;
    n.name = std::move(name);
    n.kind = kind;
    n.period = 0.010;
    n.start_active = active;
    spec.nodes.push_back(n);
  };
  add(1, "s1", NodeKind::source, true);
  add(2, "s2", NodeKind::source, true);
  add(3, "s3", NodeKind::source, false);
  add(4, "s4", NodeKind::source, false);
  add(5, "s5", NodeKind::interferer, false);
  add(6, "s6", NodeKind::intermediate, true);
  add(7, "a1", NodeKind::actuator, true);
  add(8, "a2", NodeKind::actuator, true);
  spec.routes[1] = Route{{1, 6, 7}};
  spec.routes[2] = Route{{2, 7}};
  spec.routes[3] = Route{{3, 6, 8}};
  spec.routes[4] = Route{{4, 8}};
  spec.routes[5] = Route{{5, 8}};
  spec.timeline = {
      {20.0, 5, true},
      {40.0, 5, false},
      {60.0, 3, true},
      {60.0, 4, true},
  };
  return spec;
}

// Interval-count-weighted averages; a row belongs to the segment containing
// the midpoint of its invocation interval.
inline SummaryTable summarize(const MetricsLog& log, double end_time,
                              double t_flc = 1.0, int segments = 4) {
  SummaryTable table;
  table.scheme = log.scheme;
  table.seed = log.seed;
  for (int i = 0; i <= segments; ++i)
    table.segment_bounds.push_back(end_time * i / segments);
  const double seg_len = end_time / segments;
  for (const auto& totals : log.totals) {
    SourceSummary s;
    s.source = totals.source;
    s.segment_avg_dmr.assign(segments, std::nan(""));
    s.segment_interval_count.assign(segments, 0);
    std::vector<double> seg_sum(segments, 0.0);
    double sum = 0.0;
    for (const auto& row : log.rows) {
      if (row.source != s.source) continue;
      sum += row.dmr;
      s.interval_count += 1;
      const double mid = row.t_end - 0.5 * t_flc;
      int idx = static_cast<int>(std::floor(mid / seg_len));
      if (idx < 0) idx = 0;
      if (idx >= segments) idx = segments - 1;
      seg_sum[idx] += row.dmr;
      s.segment_interval_count[idx] += 1;
    }
    s.avg_dmr = s.interval_count
                    ? sum / static_cast<double>(s.interval_count)
                    : std::nan("");
    for (int i = 0; i < segments; ++i)
      if (s.segment_interval_count[i])
        s.segment_avg_dmr[i] =
            seg_sum[i] / static_cast<double>(s.segment_interval_count[i]);
    table.sources.push_back(std::move(s));
  }
  return table;
}

struct RunResult {
  MetricsLog log;
  SummaryTable summary;
};

inline RunResult run_scheme(const ScenarioSpec& spec,
                            std::ostream* trace = nullptr) {
  Simulation sim(spec);
  sim.set_trace(trace);
  RunResult r;
  r.log = sim.run_until(spec.end_time);
  r.summary = summarize(r.log, spec.end_time, spec.qos.t_flc);
  return r;
}

struct CompareSourceRow {
  std::string source;
  double fixed_mean = 0.0;
  double fixed_spread = 0.0;  // population standard deviation over seeds
  double flc_mean = 0.0;
  double flc_spread = 0.0;
  double flc_to_fixed_ratio = 0.0;
};

struct CompareReport {
  std::vector<std::uint64_t> seeds;
  std::vector<CompareSourceRow> sources;
  std::vector<RunResult> fixed_runs;
  std::vector<RunResult> flc_runs;
};

// Runs both schemes for every seed (in parallel) and reduces to per-source
// mean and spread of the whole-run average DMR.
inline CompareReport compare(const ScenarioSpec& base,
                             const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty())
    throw ScenarioValidationError("compare: seed list must not be empty");
  CompareReport report;
  report.seeds = seeds;
  std::vector<std::future<RunResult>> fixed_fut, flc_fut;
  for (auto seed : seeds) {
    ScenarioSpec fx = base;
    fx.scheme = Scheme::fixed;
    fx.seed = seed;
    ScenarioSpec fl = base;
    fl.scheme = Scheme::flc;
    fl.seed = seed;
    fixed_fut.push_back(std::async(std::launch::async,
                                   [fx] { return run_scheme(fx); }));
    flc_fut.push_back(std::async(std::launch::async,
                                 [fl] { return run_scheme(fl); }));
  }
  for (auto& f : fixed_fut) report.fixed_runs.push_back(f.get());
  for (auto& f : flc_fut) report.flc_runs.push_back(f.get());

  if (!report.fixed_runs.empty()) {
    const auto& names = report.fixed_runs.front().summary.sources;
    for (std::size_t i = 0; i < names.size(); ++i) {
      CompareSourceRow row;
      row.source = names[i].source;
      auto stats = [&](const std::vector<RunResult>& runs, double& mean,
                       double& spread) {
        double sum = 0.0, sq = 0.0;
        for (const auto& r : runs) {
          const double v = r.summary.sources[i].avg_dmr;
          sum += v;
          sq += v * v;
        }
        const double n = static_cast<double>(runs.size());
        mean = sum / n;
        const double var = std::max(0.0, sq / n - mean * mean);
        spread = std::sqrt(var);
      };
      stats(report.fixed_runs, row.fixed_mean, row.fixed_spread);
      stats(report.flc_runs, row.flc_mean, row.flc_spread);
      row.flc_to_fixed_ratio =
          row.fixed_mean > 0.0 ? row.flc_mean / row.fixed_mean
                               : std::nan("");
      report.sources.push_back(row);
    }
  }
  return report;
}

}  // namespace flcqm
