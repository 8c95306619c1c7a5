#pragma once

#include <vector>

#include "ccgldpc/density_evolution.hpp"

namespace ccgldpc {

struct ThresholdResult {
  double value = 0.0;
  double resolution = 0.0;  // half of the final bracket width
  long de_runs = 0;
  long budget_exhausted_runs = 0;
  int chain_length = 0;  // final L for coupled specs, 0 otherwise
};

// optional certified bracket seed; hi < 0 means use the default
// [0, 1 - R + 0.05].  Seeds are re-validated and silently replaced by the
// default bracket when their verdicts do not straddle the threshold.
struct BisectionBracket {
  double lo = 0.0;
  double hi = -1.0;
};

// largest channel erasure rate with converging density evolution, by
// bisection on the convergence predicate.  Coupled specs re-run with the
// chain length doubled until two stages agree within
// max(1e-5, resolution).
ThresholdResult bp_threshold(const EnsembleSpec& spec,
                             double resolution = 1e-5,
                             const DEConfig& cfg = {},
                             const BisectionBracket& seed = {});

struct ExitCurve {
  std::vector<double> eps;  // ascending, covers [eps_bp - 0.01, 1]
  std::vector<double> pe;
  double eps_bp = 0.0;
};

struct ExitCurveOptions {
  double initial_step = 0.01;
  double refine_delta = 0.01;  // subdivide while neighbours differ by more
  double min_step = 1e-3;
  double bp_resolution = 1e-4;
};

// extrinsic erasure curve eps -> p_e from cold-started density evolution
// at every grid point
ExitCurve exit_curve(const EnsembleSpec& spec,
                     const ExitCurveOptions& opt = {},
                     const DEConfig& cfg = {});

struct MapThresholdResult {
  double value = 0.0;
  double resolution = 0.0;  // change over the last grid halving
  double eps_bp = 0.0;
  ExitCurve curve;  // finest curve used
};

// area-theorem threshold: the x with integral of p_e over [x, 1] equal to
// the design rate, refined by halving the curve grid until stable
MapThresholdResult map_threshold(const EnsembleSpec& spec,
                                 double resolution = 2e-4,
                                 const DEConfig& cfg = {});

}  // namespace ccgldpc
