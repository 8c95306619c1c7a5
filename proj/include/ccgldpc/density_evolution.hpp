#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ccgldpc/ensemble.hpp"
#include "ccgldpc/transfer.hpp"

namespace ccgldpc {

struct DEConfig {
  double target = 1e-8;      // max a-posteriori erasure declared converged
  double stall_tol = 1e-13;  // relative profile change declaring a stall
  long max_iterations = 0;   // 0 = 2e5 uncoupled, 1e6 coupled
};

enum class DEStatus { kConverged, kStalled, kBudgetExhausted };

struct DEResult {
  DEStatus status = DEStatus::kBudgetExhausted;
  long iterations = 0;
  Eigen::ArrayXd q;  // variable-to-check erasure profile (size 1 or L)
  Eigen::ArrayXd p;  // check-to-variable profile (size 1 or L+m)
  double p_a_max = 0.0;

  bool converged() const { return status == DEStatus::kConverged; }
};

// extrinsic erasure of a degree-dc single parity check
double check_update_spc(int dc, double q);

// extrinsic erasure of the punctured constraint trellis: systematic prior
// q, parity prior (q + dc - 2)/(dc - 1) from random puncturing, edge
// average ((dc-1) p_s + p_p)/dc
double check_update_cc(int dc, const TransferFunction& tf, double q);

double var_update(int dv, double eps, double p);

using DEObserver = std::function<void(long iteration, const Eigen::ArrayXd& q)>;

DEResult de_run_uncoupled(const EnsembleSpec& spec, double eps,
                          const DEConfig& cfg = {});
DEResult de_run_coupled(const EnsembleSpec& spec, double eps,
                        const DEConfig& cfg = {},
                        const DEObserver& observer = {});
DEResult de_run(const EnsembleSpec& spec, double eps, const DEConfig& cfg = {});

// limit of p_a/eps: (p^inf)^dv uncoupled, averaged over positions when
// coupled; exactly 0 for converged runs
double extrinsic_exit(const EnsembleSpec& spec, double eps,
                      const DEConfig& cfg = {});

}  // namespace ccgldpc
