#include "ccgldpc/transfer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace ccgldpc {

namespace {

constexpr std::int64_t kOne = 1000000000000LL;
constexpr std::size_t kMemoCap = 1u << 20;

double uniform01(std::uint64_t r) { return double(r >> 11) * 0x1.0p-53; }

}  // namespace

TransferFunction::TransferFunction(const GeneratorSpec& gen)
    : gen_(gen), trellis_(build_trellis(gen)), chain_(build_subset_chain(trellis_)) {}

bool TransferFunction::is_corner(std::int64_t ks, std::int64_t kp) const {
  return (ks == 0 || ks == kOne) && (kp == 0 || kp == kOne);
}

Eigen::VectorXd TransferFunction::corner_distribution(const SubsetMaps& maps,
                                                      double q_s,
                                                      double q_p) const {
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(Eigen::Index(maps.masks.size()));
  if (q_s < 0.5) {
    // every symbol known: the subset collapses to the true state
    pi[maps.zero_index] = 1.0;
  } else if (q_p > 0.5) {
    pi[maps.full_index] = 1.0;
  } else {
    // systematic fully erased, parity fully observed: the chain follows a
    // single deterministic map, so average over its limit cycle
    std::vector<int> order;
    std::vector<int> seen_at(maps.masks.size(), -1);
    int idx = maps.full_index;
    while (seen_at[size_t(idx)] < 0) {
      seen_at[size_t(idx)] = int(order.size());
      order.push_back(idx);
      idx = maps.next[kPatSysErased][size_t(idx)];
    }
    int start = seen_at[size_t(idx)];
    double w = 1.0 / double(order.size() - size_t(start));
    for (size_t i = size_t(start); i < order.size(); ++i) pi[order[i]] += w;
  }
  return pi;
}

Eigen::VectorXd TransferFunction::stationary(const SubsetMaps& maps, double q_s,
                                             double q_p) const {
  const Eigen::Index n = Eigen::Index(maps.masks.size());
  if (n > 4096) throw std::runtime_error("subset chain too large for dense solve");
  std::array<double, 4> w = pattern_weights(q_s, q_p);

  Eigen::MatrixXd PT = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int p = 0; p < 4; ++p)
      PT(maps.next[size_t(p)][size_t(i)], i) += w[size_t(p)];

  Eigen::MatrixXd A = PT - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(b);

  auto acceptable = [&](const Eigen::VectorXd& v) {
    if (!v.allFinite()) return false;
    if (v.minCoeff() < -1e-9) return false;
    double residual = (PT * v - v).cwiseAbs().maxCoeff();
    return residual <= 1e-9;
  };

  if (!acceptable(pi)) {
    // slow-mixing or borderline-singular case: plain power iteration
    pi.setConstant(1.0 / double(n));
    Eigen::VectorXd nxt(n);
    double prev_delta = std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int step = 0; step < 200000; ++step) {
      nxt = PT * pi;
      nxt /= nxt.sum();
      double delta = (nxt - pi).cwiseAbs().sum();
      pi = nxt;
      double ratio = delta / prev_delta;
      prev_delta = delta;
      if (delta == 0.0 ||
          (ratio < 0.9999 && delta * ratio / (1.0 - ratio) < 1e-14)) {
        ok = true;
        break;
      }
    }
    if (!ok || !acceptable(pi)) {
      double residual = (PT * pi - pi).cwiseAbs().maxCoeff();
      throw std::runtime_error(
          "stationary distribution did not converge, residual " +
          std::to_string(residual));
    }
  }

  for (Eigen::Index i = 0; i < n; ++i)
    if (pi[i] < 0.0) pi[i] = 0.0;
  pi /= pi.sum();
  return pi;
}

TransferPoint TransferFunction::kernel(const Eigen::VectorXd& pf,
                                       const Eigen::VectorXd& pb, double q_s,
                                       double q_p) const {
  const int ns = chain_.num_states;
  const std::uint32_t full = (1u << ns) - 1u;
  // subset-sum table: sos[x] = total backward mass on subsets inside x
  std::vector<double>& sos = sos_buffer_;
  sos.assign(size_t(full) + 1, 0.0);
  const auto& bmasks = chain_.backward.masks;
  for (Eigen::Index j = 0; j < pb.size(); ++j) sos[bmasks[size_t(j)]] += pb[j];
  for (int bit = 0; bit < ns; ++bit)
    for (std::uint32_t x = 0; x <= full; ++x)
      if (x >> bit & 1u) sos[x] += sos[x ^ (1u << bit)];

  auto hit = [&](std::uint32_t m) { return 1.0 - sos[full & ~m]; };

  double ps = 0.0, pp = 0.0;
  for (Eigen::Index i = 0; i < pf.size(); ++i) {
    double w = pf[i];
    if (w == 0.0) continue;
    ps += w * ((1.0 - q_p) * hit(chain_.sys1_par0[size_t(i)]) +
               q_p * hit(chain_.sys1_any[size_t(i)]));
    pp += w * ((1.0 - q_s) * hit(chain_.par1_sys0[size_t(i)]) +
               q_s * hit(chain_.par1_any[size_t(i)]));
  }
  return {std::clamp(ps, 0.0, 1.0), std::clamp(pp, 0.0, 1.0)};
}

TransferPoint TransferFunction::eval_exact(double q_s, double q_p) const {
  std::int64_t ks = quantize_q(q_s), kp = quantize_q(q_p);
  if (is_corner(ks, kp)) {
    Eigen::VectorXd pf = corner_distribution(chain_.forward, q_s, q_p);
    Eigen::VectorXd pb = corner_distribution(chain_.backward, q_s, q_p);
    return kernel(pf, pb, q_s, q_p);
  }
  Eigen::VectorXd pf = stationary(chain_.forward, q_s, q_p);
  Eigen::VectorXd pb = stationary(chain_.backward, q_s, q_p);
  return kernel(pf, pb, q_s, q_p);
}

TransferPoint TransferFunction::eval(double q_s, double q_p) const {
  std::int64_t ks = quantize_q(q_s), kp = quantize_q(q_p);
  Key key{ks, kp};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  TransferPoint tp = eval_exact(double(ks) * 1e-12, double(kp) * 1e-12);
  if (memo_.size() >= kMemoCap) memo_.clear();
  memo_.emplace(key, tp);
  return tp;
}

TransferPoint TransferFunction::eval_warm(double q_s, double q_p,
                                          WarmState& ws) const {
  std::int64_t ks = quantize_q(q_s), kp = quantize_q(q_p);
  if (ws.init && ks == ws.key_s && kp == ws.key_p) return ws.last;
  TransferPoint tp = eval(q_s, q_p);
  ws.init = true;
  ws.key_s = ks;
  ws.key_p = kp;
  ws.last = tp;
  return tp;
}

Eigen::VectorXd TransferFunction::stationary_forward(double q_s,
                                                     double q_p) const {
  std::int64_t ks = quantize_q(q_s), kp = quantize_q(q_p);
  q_s = double(ks) * 1e-12;
  q_p = double(kp) * 1e-12;
  if (is_corner(ks, kp)) return corner_distribution(chain_.forward, q_s, q_p);
  return stationary(chain_.forward, q_s, q_p);
}

Eigen::VectorXd TransferFunction::stationary_backward(double q_s,
                                                      double q_p) const {
  std::int64_t ks = quantize_q(q_s), kp = quantize_q(q_p);
  q_s = double(ks) * 1e-12;
  q_p = double(kp) * 1e-12;
  if (is_corner(ks, kp)) return corner_distribution(chain_.backward, q_s, q_p);
  return stationary(chain_.backward, q_s, q_p);
}

McTransferEstimate mc_transfer_oracle(const GeneratorSpec& gen, double q_s,
                                      double q_p, long sections,
                                      std::uint64_t seed) {
  if (sections < 1000)
    throw std::invalid_argument("mc_transfer_oracle needs >= 1000 sections");
  if (q_s < 0.0 || q_s > 1.0 || q_p < 0.0 || q_p > 1.0)
    throw std::invalid_argument("erasure rates must lie in [0,1]");

  Trellis t = build_trellis(gen);
  SubsetChain chain = build_subset_chain(t);
  const auto& fwd = chain.forward;
  const auto& bwd = chain.backward;

  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> pat(static_cast<std::size_t>(sections));
  for (auto& p : pat) {
    int se = uniform01(rng()) < q_s ? 1 : 0;
    int pe = uniform01(rng()) < q_p ? 1 : 0;
    p = std::uint8_t((se << 1) | pe);
  }

  // backward pass: bidx[t] = subset index at the right boundary of
  // section t-1, consistent with sections t .. end plus termination
  std::vector<std::int32_t> bidx(size_t(sections) + 1);
  bidx[size_t(sections)] = bwd.zero_index;
  for (long tt = sections - 1; tt >= 0; --tt)
    bidx[size_t(tt)] =
        bwd.next[pat[size_t(tt)]][size_t(bidx[size_t(tt) + 1])];

  long margin = std::min<long>(1000, sections / 10);
  long lo = margin, hi = sections - margin;
  long count = hi - lo;
  const int nb = 200;

  std::array<std::vector<double>, 2> batch_sum;
  batch_sum[0].assign(nb, 0.0);
  batch_sum[1].assign(nb, 0.0);
  std::vector<long> batch_n(nb, 0);

  std::int32_t fidx = fwd.zero_index;
  for (long tt = 0; tt < sections; ++tt) {
    if (tt >= lo && tt < hi) {
      std::uint32_t bmask = bwd.masks[size_t(bidx[size_t(tt) + 1])];
      int p = pat[size_t(tt)];
      std::uint32_t ms = (p & 1) ? chain.sys1_any[size_t(fidx)]
                                 : chain.sys1_par0[size_t(fidx)];
      std::uint32_t mp = (p & 2) ? chain.par1_any[size_t(fidx)]
                                 : chain.par1_sys0[size_t(fidx)];
      int batch = int((tt - lo) * nb / count);
      batch_sum[0][size_t(batch)] += (ms & bmask) ? 1.0 : 0.0;
      batch_sum[1][size_t(batch)] += (mp & bmask) ? 1.0 : 0.0;
      ++batch_n[size_t(batch)];
    }
    fidx = fwd.next[pat[size_t(tt)]][size_t(fidx)];
  }

  McTransferEstimate est;
  est.counted_sections = count;
  for (int which = 0; which < 2; ++which) {
    double total = 0.0;
    for (int b = 0; b < nb; ++b) total += batch_sum[size_t(which)][size_t(b)];
    double mean = total / double(count);
    double var = 0.0;
    for (int b = 0; b < nb; ++b) {
      double bm = batch_sum[size_t(which)][size_t(b)] / double(batch_n[size_t(b)]);
      var += (bm - mean) * (bm - mean);
    }
    var /= double(nb - 1);
    double se = std::sqrt(var / double(nb));
    if (which == 0) {
      est.p_s = mean;
      est.se_s = se;
    } else {
      est.p_p = mean;
      est.se_p = se;
    }
  }
  return est;
}

}  // namespace ccgldpc
