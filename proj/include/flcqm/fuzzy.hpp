#pragma once

// Mamdani fuzzy inference: piecewise-linear sets, max-min inference,
// centre-of-gravity defuzzification. The controller maps a deadline miss
// ratio error and its change onto a sampling period increment (ms).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace flcqm {

struct UniverseInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Triangular set with optional shoulder: membership held at 1 beyond the
// peak toward the universe edge on the shoulder side.
struct FuzzySet {
  std::string label;
  double left_foot = 0.0;
  double peak = 0.0;
  double right_foot = 0.0;
  bool left_shoulder = false;
  bool right_shoulder = false;

  double membership(double x) const {
    if (x < peak) {
      if (left_shoulder) return 1.0;
      if (x <= left_foot) return 0.0;
      return (x - left_foot) / (peak - left_foot);
    }
    if (x > peak) {
      if (right_shoulder) return 1.0;
      if (x >= right_foot) return 0.0;
      return (right_foot - x) / (right_foot - peak);
    }
    return 1.0;
  }
};

inline double membership_eval(const FuzzySet& set, double x) {
  return set.membership(x);
}

struct LinguisticVariable {
  std::string name;
  UniverseInterval universe;
  std::vector<FuzzySet> sets;

  double clamp(double x) const {
    return std::min(std::max(x, universe.lo), universe.hi);
  }

  const FuzzySet* find(const std::string& label) const {
    for (const auto& s : sets)
      if (s.label == label) return &s;
    return nullptr;
  }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < sets.size(); ++i)
      if (sets[i].label == label) return static_cast<int>(i);
    return -1;
  }
};

// Inputs outside the universe are saturated before evaluation; with
// shoulder sets on the edges this is equivalent to extending the shoulder.
inline std::map<std::string, double> fuzzify(const LinguisticVariable& var,
                                             double x) {
  const double xs = var.clamp(x);
  std::map<std::string, double> out;
  for (const auto& s : var.sets) out[s.label] = s.membership(xs);
  return out;
}

struct Rule {
  std::string e_label;
  std::string de_label;
  std::string dh_label;
};

struct RuleBase {
  std::vector<Rule> rules;

  const Rule* find(const std::string& e_label,
                   const std::string& de_label) const {
    for (const auto& r : rules)
      if (r.e_label == e_label && r.de_label == de_label) return &r;
    return nullptr;
  }
};

class ZeroMassError : public std::runtime_error {
 public:
  ZeroMassError() : std::runtime_error("defuzzify: aggregate has zero mass") {}
};

class FuzzyValidationError : public std::invalid_argument {
 public:
  explicit FuzzyValidationError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

namespace detail {

inline void check_variable(const LinguisticVariable& var,
                           const std::vector<std::string>& expected_labels) {
  if (!(var.universe.lo < var.universe.hi))
    throw FuzzyValidationError(var.name + ": universe lo must be < hi");
  if (var.sets.size() != expected_labels.size())
    throw FuzzyValidationError(var.name + ": wrong number of sets");
  for (std::size_t i = 0; i < var.sets.size(); ++i) {
    const auto& s = var.sets[i];
    if (s.label != expected_labels[i])
      throw FuzzyValidationError(var.name + ": expected label " +
                                 expected_labels[i] + ", got " + s.label);
    if (!(s.left_foot <= s.peak && s.peak <= s.right_foot))
      throw FuzzyValidationError(var.name + "/" + s.label +
                                 ": feet must bracket the peak");
  }
  // Coverage: every point of the universe has nonzero membership somewhere.
  const int n = 2001;
  for (int i = 0; i < n; ++i) {
    const double x =
        var.universe.lo + (var.universe.hi - var.universe.lo) * i / (n - 1);
    double best = 0.0;
    for (const auto& s : var.sets) best = std::max(best, s.membership(x));
    if (best <= 0.0)
      throw FuzzyValidationError(var.name + ": universe not covered at x=" +
                                 std::to_string(x));
  }
}

inline void check_rule_base(const RuleBase& rb, const LinguisticVariable& e_var,
                            const LinguisticVariable& de_var,
                            const LinguisticVariable& dh_var) {
  const std::size_t expect = e_var.sets.size() * de_var.sets.size();
  if (rb.rules.size() != expect)
    throw FuzzyValidationError("rule base must contain exactly " +
                               std::to_string(expect) + " rules, got " +
                               std::to_string(rb.rules.size()));
  for (const auto& ea : e_var.sets)
    for (const auto& da : de_var.sets) {
      int hits = 0;
      for (const auto& r : rb.rules)
        if (r.e_label == ea.label && r.de_label == da.label) ++hits;
      if (hits != 1)
        throw FuzzyValidationError("rule base: antecedent (" + ea.label + "," +
                                   da.label + ") appears " +
                                   std::to_string(hits) + " times");
    }
  for (const auto& r : rb.rules)
    if (!dh_var.find(r.dh_label))
      throw FuzzyValidationError("rule base: unknown consequent " + r.dh_label);
}

}  // namespace detail

class FuzzyController {
 public:
  FuzzyController(LinguisticVariable e_var, LinguisticVariable de_var,
                  LinguisticVariable dh_var, RuleBase rule_base,
                  int defuzz_resolution = kDefaultResolution)
      : e_var_(std::move(e_var)),
        de_var_(std::move(de_var)),
        dh_var_(std::move(dh_var)),
        rule_base_(std::move(rule_base)),
        resolution_(defuzz_resolution) {
    detail::check_variable(e_var_, {"NB", "NS", "ZE", "PS", "PB"});
    detail::check_variable(de_var_, {"NB", "NS", "ZE", "PS", "PB"});
    detail::check_variable(dh_var_,
                           {"NB", "NM", "NS", "ZE", "PS", "PM", "PB"});
    detail::check_rule_base(rule_base_, e_var_, de_var_, dh_var_);
    if (resolution_ < 101)
      throw FuzzyValidationError("defuzz_resolution must be >= 101");
  }

  static constexpr int kDefaultResolution = 18001;

  const LinguisticVariable& e_var() const { return e_var_; }
  const LinguisticVariable& de_var() const { return de_var_; }
  const LinguisticVariable& dh_var() const { return dh_var_; }
  const RuleBase& rule_base() const { return rule_base_; }
  int defuzz_resolution() const { return resolution_; }

  double grid_point(int i) const {
    return dh_var_.universe.lo +
           (dh_var_.universe.hi - dh_var_.universe.lo) * i / (resolution_ - 1);
  }

  // Max-min inference: each rule fires at min of its antecedent memberships,
  // clips its consequent, and the aggregate is the pointwise max.
  std::vector<double> infer(const std::map<std::string, double>& e_memb,
                            const std::map<std::string, double>& de_memb) const {
    std::vector<double> clip(dh_var_.sets.size(), 0.0);
    for (const auto& r : rule_base_.rules) {
      const auto ei = e_memb.find(r.e_label);
      const auto di = de_memb.find(r.de_label);
      const double we = ei == e_memb.end() ? 0.0 : ei->second;
      const double wd = di == de_memb.end() ? 0.0 : di->second;
      const double w = std::min(we, wd);
      if (w <= 0.0) continue;
      const int k = dh_var_.index_of(r.dh_label);
      clip[k] = std::max(clip[k], w);
    }
    std::vector<double> agg(resolution_, 0.0);
    for (std::size_t k = 0; k < clip.size(); ++k) {
      if (clip[k] <= 0.0) continue;
      const FuzzySet& s = dh_var_.sets[k];
      for (int i = 0; i < resolution_; ++i) {
        const double m = std::min(clip[k], s.membership(grid_point(i)));
        if (m > agg[i]) agg[i] = m;
      }
    }
    return agg;
  }

  // Discrete centre of gravity over the grid. The two edge points carry half
  // weight so shoulder mass at the universe edge does not bias the result
  // with an O(grid step) term.
  double defuzzify_centroid(const std::vector<double>& aggregate) const {
    double num = 0.0, den = 0.0;
    const int n = static_cast<int>(aggregate.size());
    for (int i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      const double lo = dh_var_.universe.lo;
      const double x = lo + (dh_var_.universe.hi - lo) * i / (n - 1);
      num += w * x * aggregate[i];
      den += w * aggregate[i];
    }
    if (den <= 0.0) throw ZeroMassError();
    return num / den;
  }

  double step(double e, double de) const {
    return defuzzify_centroid(infer(fuzzify(e_var_, e), fuzzify(de_var_, de)));
  }

  struct SurfacePoint {
    double e;
    double de;
    double dh;
  };

  std::vector<SurfacePoint> surface_sample(int e_grid_n, int de_grid_n) const {
    if (e_grid_n < 2 || de_grid_n < 2)
      throw FuzzyValidationError("surface grid sizes must be >= 2");
    std::vector<SurfacePoint> out;
    out.reserve(static_cast<std::size_t>(e_grid_n) * de_grid_n);
    for (int i = 0; i < e_grid_n; ++i) {
      const double e = e_var_.universe.lo +
                       (e_var_.universe.hi - e_var_.universe.lo) * i /
                           (e_grid_n - 1);
      for (int j = 0; j < de_grid_n; ++j) {
        const double de = de_var_.universe.lo +
                          (de_var_.universe.hi - de_var_.universe.lo) * j /
                              (de_grid_n - 1);
        out.push_back({e, de, step(e, de)});
      }
    }
    return out;
  }

 private:
  LinguisticVariable e_var_;
  LinguisticVariable de_var_;
  LinguisticVariable dh_var_;
  RuleBase rule_base_;
  int resolution_;
};

// Triangles with feet at adjacent peaks; the outermost sets are shoulders.
inline LinguisticVariable make_triangular_variable(
    std::string name, UniverseInterval universe,
    const std::vector<std::string>& labels, const std::vector<double>& peaks) {
  if (labels.size() != peaks.size())
    throw FuzzyValidationError(name + ": labels/peaks size mismatch");
  LinguisticVariable var{std::move(name), universe, {}};
  const std::size_t n = peaks.size();
  for (std::size_t i = 0; i < n; ++i) {
    FuzzySet s;
    s.label = labels[i];
    s.peak = peaks[i];
    s.left_foot = i > 0 ? peaks[i - 1] : peaks[i];
    s.right_foot = i + 1 < n ? peaks[i + 1] : peaks[i];
    s.left_shoulder = (i == 0);
    s.right_shoulder = (i + 1 == n);
    var.sets.push_back(s);
  }
  return var;
}

inline LinguisticVariable default_e_variable() {
  return make_triangular_variable("E", {-0.2, 0.1},
                                  {"NB", "NS", "ZE", "PS", "PB"},
                                  {-0.2, -0.1, 0.0, 0.05, 0.1});
}

inline LinguisticVariable default_de_variable() {
  return make_triangular_variable("DE", {-0.2, 0.2},
                                  {"NB", "NS", "ZE", "PS", "PB"},
                                  {-0.2, -0.1, 0.0, 0.1, 0.2});
}

inline LinguisticVariable default_dh_variable() {
  return make_triangular_variable("DH", {-1.5, 3.0},
                                  {"NB", "NM", "NS", "ZE", "PS", "PM", "PB"},
                                  {-1.5, -1.0, -0.5, 0.0, 0.5, 1.75, 3.0});
}

// 25-rule table: rows are E labels NB..PB, columns DE labels NB..PB.
inline RuleBase default_rule_base() {
  static const char* table[5][5] = {
      {"PB", "PB", "PB", "PM", "PS"},
      {"PM", "PS", "PS", "ZE", "ZE"},
      {"PS", "ZE", "ZE", "ZE", "NS"},
      {"ZE", "ZE", "NS", "NS", "NM"},
      {"NS", "NS", "NM", "NB", "NB"},
  };
  static const char* in5[5] = {"NB", "NS", "ZE", "PS", "PB"};
  RuleBase rb;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) rb.rules.push_back({in5[i], in5[j], table[i][j]});
  return rb;
}

inline FuzzyController default_controller(
    int resolution = FuzzyController::kDefaultResolution) {
  return FuzzyController(default_e_variable(), default_de_variable(),
                         default_dh_variable(), default_rule_base(),
                         resolution);
}

}  // namespace flcqm
