#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ccgldpc/subset_chain.hpp"

namespace ccgldpc {

struct TransferPoint {
  double p_s = 0.0;
  double p_p = 0.0;
};

// inputs are snapped to a 1e-12 grid before use so that memoized and
// incremental evaluations see identical arguments
inline std::int64_t quantize_q(double q) {
  std::int64_t k = std::llround(q * 1e12);
  if (k < 0) k = 0;
  if (k > 1000000000000LL) k = 1000000000000LL;
  return k;
}

// exact extrinsic erasure probabilities (p_s, p_p) of one constraint
// trellis on the BEC with systematic/parity prior erasure rates
// (q_s, q_p), computed from stationary distributions of the forward and
// backward consistent-subset chains.  Instances are not safe for
// concurrent use; give each worker its own copy.
class TransferFunction {
 public:
  explicit TransferFunction(const GeneratorSpec& gen);

  TransferPoint eval(double q_s, double q_p) const;

  // variant for sweeps whose inputs drift slowly: short-circuits repeated
  // arguments at the same call site before consulting the shared memo
  struct WarmState {
    std::int64_t key_s = -1, key_p = -1;
    TransferPoint last;
    bool init = false;
  };
  TransferPoint eval_warm(double q_s, double q_p, WarmState& ws) const;

  Eigen::VectorXd stationary_forward(double q_s, double q_p) const;
  Eigen::VectorXd stationary_backward(double q_s, double q_p) const;

  const SubsetChain& chain() const { return chain_; }
  const GeneratorSpec& generator() const { return gen_; }

 private:
  struct Key {
    std::int64_t s, p;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 1469598103934665603ull;
      for (std::uint64_t v : {std::uint64_t(k.s), std::uint64_t(k.p)}) {
        h ^= v;
        h *= 1099511628211ull;
      }
      return std::size_t(h);
    }
  };

  TransferPoint eval_exact(double q_s, double q_p) const;
  TransferPoint kernel(const Eigen::VectorXd& pf, const Eigen::VectorXd& pb,
                       double q_s, double q_p) const;
  Eigen::VectorXd stationary(const SubsetMaps& maps, double q_s,
                             double q_p) const;
  Eigen::VectorXd corner_distribution(const SubsetMaps& maps, double q_s,
                                      double q_p) const;
  bool is_corner(std::int64_t ks, std::int64_t kp) const;

  GeneratorSpec gen_;
  Trellis trellis_;
  SubsetChain chain_;
  mutable std::unordered_map<Key, TransferPoint, KeyHash> memo_;
  mutable std::vector<double> sos_buffer_;
};

// Monte Carlo estimate of the same quantities from one long terminated
// all-zero transmission with i.i.d. section erasures; standard errors come
// from batch means over interior sections
struct McTransferEstimate {
  double p_s = 0.0;
  double p_p = 0.0;
  double se_s = 0.0;
  double se_p = 0.0;
  long counted_sections = 0;
};

McTransferEstimate mc_transfer_oracle(const GeneratorSpec& gen, double q_s,
                                      double q_p, long sections,
                                      std::uint64_t seed);

}  // namespace ccgldpc
