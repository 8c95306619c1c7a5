#include "ccgldpc/density_evolution.hpp"

#include <cassert>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace ccgldpc {

namespace {

constexpr long kDefaultUncoupledIters = 200000;
constexpr long kDefaultCoupledIters = 1000000;

double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("channel erasure rate must lie in [0,1]");
}

DEResult degenerate_result(const EnsembleSpec& spec, double eps) {
  DEResult r;
  long L = spec.is_coupled() ? spec.coupling->L : 1;
  long PM = spec.is_coupled() ? spec.coupling->L + spec.coupling->m : 1;
  r.q = Eigen::ArrayXd::Constant(L, eps);
  r.p = Eigen::ArrayXd::Constant(PM, eps);
  r.iterations = 0;
  r.p_a_max = eps;
  r.status = (eps == 0.0) ? DEStatus::kConverged : DEStatus::kStalled;
  return r;
}

}  // namespace

double check_update_spc(int dc, double q) {
  return 1.0 - ipow(1.0 - q, dc - 1);
}

double check_update_cc(int dc, const TransferFunction& tf, double q) {
  double qp = (q + double(dc - 2)) / double(dc - 1);
  TransferPoint tp = tf.eval(q, qp);
  return (double(dc - 1) * tp.p_s + tp.p_p) / double(dc);
}

double var_update(int dv, double eps, double p) {
  return eps * ipow(p, dv - 1);
}

DEResult de_run_uncoupled(const EnsembleSpec& spec, double eps,
                          const DEConfig& cfg) {
  validate(spec);
  check_eps(eps);
  if (spec.is_coupled())
    throw std::invalid_argument("de_run_uncoupled got a coupled spec");
  if (eps == 0.0 || eps == 1.0) return degenerate_result(spec, eps);

  long maxit =
      cfg.max_iterations > 0 ? cfg.max_iterations : kDefaultUncoupledIters;
  std::unique_ptr<TransferFunction> tf;
  if (spec.is_conv()) tf = std::make_unique<TransferFunction>(*spec.conv);

  DEResult r;
  double q = eps, p = 1.0;
  for (long it = 1; it <= maxit; ++it) {
    p = spec.is_conv() ? check_update_cc(spec.dc, *tf, q)
                       : check_update_spc(spec.dc, q);
    double pa = eps * ipow(p, spec.dv);
    double qn = eps * ipow(p, spec.dv - 1);
    assert(qn <= q + 1e-14);
    r.iterations = it;
    r.p_a_max = pa;
    if (pa < cfg.target) {
      q = qn;
      r.status = DEStatus::kConverged;
      break;
    }
    if (std::abs(qn - q) <= cfg.stall_tol * std::max(qn, 1e-300)) {
      q = qn;
      r.status = DEStatus::kStalled;
      break;
    }
    q = qn;
  }
  r.q = Eigen::ArrayXd::Constant(1, q);
  r.p = Eigen::ArrayXd::Constant(1, p);
  return r;
}

DEResult de_run_coupled(const EnsembleSpec& spec, double eps,
                        const DEConfig& cfg, const DEObserver& observer) {
  validate(spec);
  check_eps(eps);
  if (!spec.is_coupled())
    throw std::invalid_argument("de_run_coupled got an uncoupled spec");
  if (eps == 0.0 || eps == 1.0) return degenerate_result(spec, eps);

  const int L = spec.coupling->L;
  const int m = spec.coupling->m;
  const int PM = L + m;
  const double inv = 1.0 / double(m + 1);
  long maxit =
      cfg.max_iterations > 0 ? cfg.max_iterations : kDefaultCoupledIters;

  std::unique_ptr<TransferFunction> tf;
  std::vector<TransferFunction::WarmState> warm;
  const int half_pm = (PM + 1) / 2;
  const int half_L = (L + 1) / 2;
  if (spec.is_conv()) {
    tf = std::make_unique<TransferFunction>(*spec.conv);
    warm.resize(size_t(half_pm));
  }

  Eigen::ArrayXd q = Eigen::ArrayXd::Constant(L, eps);
  Eigen::ArrayXd qn(L), p(PM);

  DEResult r;
  for (long it = 1; it <= maxit; ++it) {
    // the profile is symmetric about the chain center, so compute one half
    // and mirror the rest
    for (int t = 1; t <= half_pm; ++t) {
      double acc = 0.0;
      for (int l = 0; l <= m; ++l) {
        int idx = t - l;
        if (idx >= 1 && idx <= L) acc += q[idx - 1];
      }
      double qs = acc * inv;
      if (spec.is_conv()) {
        double qp = (qs + double(spec.dc - 2)) / double(spec.dc - 1);
        TransferPoint tp = tf->eval_warm(qs, qp, warm[size_t(t - 1)]);
        p[t - 1] = (double(spec.dc - 1) * tp.p_s + tp.p_p) / double(spec.dc);
      } else {
        p[t - 1] = check_update_spc(spec.dc, qs);
      }
    }
    for (int t = half_pm + 1; t <= PM; ++t) p[t - 1] = p[PM - t];

    double pa_max = 0.0;
    for (int t = 1; t <= half_L; ++t) {
      double acc = 0.0;
      for (int l = 0; l <= m; ++l) acc += p[t + l - 1];
      double pbar = acc * inv;
      double qt = eps * ipow(pbar, spec.dv - 1);
      double pa = eps * ipow(pbar, spec.dv);
      assert(qt <= q[t - 1] + 1e-14);
      if (pa > pa_max) pa_max = pa;
      qn[t - 1] = qt;
    }
    for (int t = half_L + 1; t <= L; ++t) qn[t - 1] = qn[L - t];

    r.iterations = it;
    r.p_a_max = pa_max;
    double diff = (qn - q).abs().maxCoeff();
    double scale = qn.maxCoeff();
    q = qn;
    if (observer) observer(it, q);
    if (pa_max < cfg.target) {
      r.status = DEStatus::kConverged;
      break;
    }
    if (diff <= cfg.stall_tol * std::max(scale, 1e-300)) {
      r.status = DEStatus::kStalled;
      break;
    }
  }
  r.q = q;
  r.p = p;
  return r;
}

DEResult de_run(const EnsembleSpec& spec, double eps, const DEConfig& cfg) {
  return spec.is_coupled() ? de_run_coupled(spec, eps, cfg)
                           : de_run_uncoupled(spec, eps, cfg);
}

double extrinsic_exit(const EnsembleSpec& spec, double eps,
                      const DEConfig& cfg) {
  DEResult r = de_run(spec, eps, cfg);
  if (r.converged()) return 0.0;
  if (!spec.is_coupled()) return ipow(r.p[0], spec.dv);
  const int L = spec.coupling->L;
  const int m = spec.coupling->m;
  const double inv = 1.0 / double(m + 1);
  double total = 0.0;
  for (int t = 1; t <= L; ++t) {
    double acc = 0.0;
    for (int l = 0; l <= m; ++l) acc += r.p[t + l - 1];
    total += ipow(acc * inv, spec.dv);
  }
  return total / double(L);
}

}  // namespace ccgldpc
