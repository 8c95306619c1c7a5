#include "ccgldpc/thresholds.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ccgldpc {

namespace {

constexpr double kMinResolution = 1e-6;
constexpr int kMaxDoublings = 5;  // L grows at most 32x
constexpr int kMaxMapRounds = 6;

struct ConvergencePredicate {
  const EnsembleSpec& spec;
  const DEConfig& cfg;
  long runs = 0;
  long exhausted = 0;

  bool operator()(double eps) {
    DEResult r = de_run(spec, eps, cfg);
    ++runs;
    if (r.status == DEStatus::kBudgetExhausted) ++exhausted;
    return r.converged();
  }
};

ThresholdResult bisect_stage(const EnsembleSpec& spec, double resolution,
                             const DEConfig& cfg,
                             const BisectionBracket& seed) {
  const double hi_default = std::min(1.0, 1.0 - spec.rate() + 0.05);
  ConvergencePredicate decodes{spec, cfg};

  double lo = -1.0;
  double hi = -1.0;
  if (seed.hi > 0.0) {
    double slo = std::clamp(seed.lo, 0.0, 1.0);
    double shi = std::clamp(seed.hi, 0.0, 1.0);
    if (slo < shi && decodes(slo) && !decodes(shi)) {
      lo = slo;
      hi = shi;
    }
  }
  if (hi < 0.0) {
    if (!decodes(0.0) || decodes(hi_default)) {
      throw std::runtime_error(
          "no sign change in default bisection bracket for " +
          spec.describe());
    }
    lo = 0.0;
    hi = hi_default;
  }

  while (hi - lo > 2.0 * resolution) {
    double mid = 0.5 * (lo + hi);
    if (decodes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  ThresholdResult out;
  out.value = 0.5 * (lo + hi);
  out.resolution = 0.5 * (hi - lo);
  out.de_runs = decodes.runs;
  out.budget_exhausted_runs = decodes.exhausted;
  out.chain_length = spec.is_coupled() ? spec.coupling->L : 0;
  return out;
}

}  // namespace

ThresholdResult bp_threshold(const EnsembleSpec& spec, double resolution,
                             const DEConfig& cfg,
                             const BisectionBracket& seed) {
  validate(spec);
  if (!(resolution >= kMinResolution)) {
    throw std::invalid_argument("threshold resolution must be >= 1e-6");
  }
  if (!spec.is_coupled()) return bisect_stage(spec, resolution, cfg, seed);

  const double agree = std::max(1e-5, resolution);
  const int base_length = spec.coupling->L;

  ThresholdResult prev = bisect_stage(spec, resolution, cfg, seed);
  long runs = prev.de_runs;
  long exhausted = prev.budget_exhausted_runs;

  for (int stage = 1; stage <= kMaxDoublings; ++stage) {
    EnsembleSpec longer = spec;
    longer.coupling->L = base_length << stage;

    // the previous stage pins the value to within a few grid steps, so a
    // narrow re-validated bracket around it saves most probes
    BisectionBracket near_prev;
    double margin = std::max(8.0 * resolution, 2e-3);
    near_prev.lo = std::max(0.0, prev.value - margin);
    near_prev.hi = std::min(1.0, prev.value + margin);

    ThresholdResult cur = bisect_stage(longer, resolution, cfg, near_prev);
    runs += cur.de_runs;
    exhausted += cur.budget_exhausted_runs;

    if (std::abs(cur.value - prev.value) <= agree) {
      cur.de_runs = runs;
      cur.budget_exhausted_runs = exhausted;
      return cur;
    }
    prev = cur;
  }
  std::ostringstream msg;
  msg << "coupled threshold for " << spec.describe()
      << " did not stabilize by chain length " << (base_length << kMaxDoublings);
  throw std::runtime_error(msg.str());
}

namespace {

std::int64_t grid_key(double eps) {
  return static_cast<std::int64_t>(std::llround(eps * 1e12));
}

}  // namespace

ExitCurve exit_curve(const EnsembleSpec& spec, const ExitCurveOptions& opt,
                     const DEConfig& cfg) {
  validate(spec);
  if (!(opt.initial_step > 0.0) || !(opt.min_step > 0.0) ||
      !(opt.refine_delta > 0.0)) {
    throw std::invalid_argument("exit curve steps must be positive");
  }

  ExitCurve curve;
  curve.eps_bp = bp_threshold(spec, opt.bp_resolution, cfg).value;

  // keyed on a 1e-12 grid; the exact abscissa of the first evaluation is
  // kept so the reported curve re-evaluates bit-identically
  std::map<std::int64_t, std::pair<double, double>> pe_at;
  auto eval = [&](double eps) {
    auto [it, fresh] = pe_at.try_emplace(grid_key(eps), eps, 0.0);
    if (fresh) it->second.second = extrinsic_exit(spec, eps, cfg);
    return it->second.second;
  };

  const double lo = std::max(0.0, curve.eps_bp - 0.01);
  for (double e = lo; e < 1.0 - 1e-9; e += opt.initial_step) eval(e);
  eval(1.0);

  // subdivide wherever the curve moves faster than refine_delta per cell
  std::vector<std::pair<double, double>> work;
  {
    auto it = pe_at.begin();
    auto nx = std::next(it);
    for (; nx != pe_at.end(); ++it, ++nx) {
      work.emplace_back(it->second.first, nx->second.first);
    }
  }
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    if (b - a <= opt.min_step) continue;
    if (std::abs(eval(b) - eval(a)) <= opt.refine_delta) continue;
    double mid = 0.5 * (a + b);
    eval(mid);
    work.emplace_back(a, mid);
    work.emplace_back(mid, b);
  }

  curve.eps.reserve(pe_at.size());
  curve.pe.reserve(pe_at.size());
  for (auto& [k, v] : pe_at) {
    curve.eps.push_back(v.first);
    curve.pe.push_back(v.second);
  }
  return curve;
}

namespace {

// allowance for quadrature error when deciding whether the curve carries
// any area beyond the rate; families whose transition is continuous have
// eps_map = eps_bp and a margin of exactly zero, so the trapezoid sum can
// land a hair on either side
constexpr double kAreaSlack = 1e-4;

// x in [lo of curve, 1] with integral of pe over [x, 1] equal to rate,
// by trapezoid accumulation from the top and bisection inside the
// crossing segment
double area_crossing(const ExitCurve& curve, double rate) {
  const auto& xs = curve.eps;
  const auto& ys = curve.pe;
  const std::size_t n = xs.size();
  assert(n >= 2);

  std::vector<double> tail(n, 0.0);  // integral over [xs[i], 1]
  for (std::size_t i = n - 1; i-- > 0;) {
    tail[i] =
        tail[i + 1] + 0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i]);
  }
  if (tail[0] < rate) {
    if (rate - tail[0] <= kAreaSlack) return curve.eps_bp;
    std::ostringstream msg;
    msg << "MAP threshold at or below BP threshold: curve area "
        << tail[0] << " is short of rate " << rate << " by "
        << (rate - tail[0]);
    throw std::runtime_error(msg.str());
  }

  std::size_t i = 0;
  while (i + 1 < n && tail[i + 1] >= rate) ++i;
  if (i + 1 == n) return xs[n - 1];

  double a = xs[i], b = xs[i + 1];
  double pa = ys[i], pb = ys[i + 1];
  double slope = (pb - pa) / (b - a);
  auto tail_at = [&](double x) {
    double px = pa + (x - a) * slope;
    return tail[i + 1] + 0.5 * (px + pb) * (b - x);
  };
  double lo = a, hi = b;  // tail_at(lo) >= rate >= tail_at(hi)
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (tail_at(mid) >= rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::max(0.5 * (lo + hi), curve.eps_bp);
}

}  // namespace

MapThresholdResult map_threshold(const EnsembleSpec& spec, double resolution,
                                 const DEConfig& cfg) {
  validate(spec);
  if (spec.is_coupled()) {
    throw std::invalid_argument(
        "area-theorem threshold applies to uncoupled specs only");
  }
  if (!(resolution >= kMinResolution)) {
    throw std::invalid_argument("threshold resolution must be >= 1e-6");
  }

  const double rate = spec.rate();
  MapThresholdResult out;
  double prev = 0.0;
  ExitCurveOptions opt;
  for (int round = 0; round < kMaxMapRounds; ++round) {
    opt.min_step = opt.initial_step / 8.0;
    ExitCurve curve = exit_curve(spec, opt, cfg);
    double value = area_crossing(curve, rate);
    if (round > 0 && std::abs(value - prev) <= resolution) {
      out.value = value;
      out.resolution = std::abs(value - prev);
      out.eps_bp = curve.eps_bp;
      out.curve = std::move(curve);
      return out;
    }
    prev = value;
    opt.initial_step *= 0.5;
  }
  throw std::runtime_error("area-theorem threshold for " + spec.describe() +
                           " did not stabilize under grid halving");
}

}  // namespace ccgldpc
