#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dvlab/rng.hpp"

namespace dvlab {

enum class Status { pass, fail, not_applicable };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::not_applicable: return "not_applicable";
  }
  return "unknown";
}

/// Outcome of one verifier run. margin >= -tolerance means pass; verifiers
/// whose precondition fails report not_applicable, which never counts as a pass.
struct LemmaReport {
  std::string lemma_id;
  std::string instance;
  double bound = 0.0;
  double measured = 0.0;
  double margin = 0.0;
  std::int64_t trials = 0;
  Seed seed;
  Status status = Status::not_applicable;
  bool asserting = true;  // false for evidence-only probes
  double tolerance = 0.0;
  std::vector<std::pair<std::string, double>> values;  // extra named measurements
  std::vector<std::string> notes;

  bool passed() const { return status == Status::pass; }
  /// An asserting verifier that failed.
  bool failed() const { return asserting && status == Status::fail; }

  LemmaReport& value(std::string name, double v) {
    values.emplace_back(std::move(name), v);
    return *this;
  }
  LemmaReport& note(std::string text) {
    notes.push_back(std::move(text));
    return *this;
  }
  double get(const std::string& name) const {
    for (const auto& [k, v] : values)
      if (k == name) return v;
    return std::nan("");
  }
};

/// Upper-bound check: measured <= bound within tolerance.
inline LemmaReport upper_report(std::string id, std::string instance, double bound, double measured, double tol) {
  LemmaReport r;
  r.lemma_id = std::move(id);
  r.instance = std::move(instance);
  r.bound = bound;
  r.measured = measured;
  r.margin = bound - measured;
  r.tolerance = tol;
  r.status = r.margin >= -tol ? Status::pass : Status::fail;
  return r;
}

/// Lower-bound check: measured >= bound within tolerance.
inline LemmaReport lower_report(std::string id, std::string instance, double bound, double measured, double tol) {
  LemmaReport r = upper_report(std::move(id), std::move(instance), bound, measured, tol);
  r.margin = measured - bound;
  r.status = r.margin >= -tol ? Status::pass : Status::fail;
  return r;
}

inline LemmaReport not_applicable(std::string id, std::string instance, std::string why) {
  LemmaReport r;
  r.lemma_id = std::move(id);
  r.instance = std::move(instance);
  r.status = Status::not_applicable;
  r.notes.push_back(std::move(why));
  return r;
}

}  // namespace dvlab
