#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mcflow/commutator.hpp"
#include "mcflow/stationary.hpp"

namespace mcflow::suite {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Empty selection runs all 13. `report` is called as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const std::set<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

std::string format_line(const CriterionResult& r);

// Shared with the CLI.
FluidState sample_state(const PolarOps& ops, const StationaryState& st);
std::vector<Complex> random_interior(const CircularDomain& d, int n, unsigned seed);

struct RepresentationRun {
  int resolution = 0;
  RepresentationReport report;
};
// "steady": exact rotating state (C1 = 1, C2 = 3) on the r = 0.5 annulus;
// "manufactured": the time-dependent flow around t = 1/2.
RepresentationRun representation_run(const std::string& preset, int resolution, double inner_radius = 0.5);

}  // namespace mcflow::suite
