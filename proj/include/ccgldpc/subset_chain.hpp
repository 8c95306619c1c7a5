#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ccgldpc/trellis.hpp"

namespace ccgldpc {

// observation pattern of one trellis section under the all-zero codeword;
// bit 1 of the index = systematic erased, bit 0 = parity erased
enum SectionPattern : int {
  kPatBothObserved = 0,
  kPatParityErased = 1,
  kPatSysErased = 2,
  kPatBothErased = 3,
};

inline std::array<double, 4> pattern_weights(double q_s, double q_p) {
  return {(1.0 - q_s) * (1.0 - q_p), (1.0 - q_s) * q_p, q_s * (1.0 - q_p),
          q_s * q_p};
}

// deterministic maps on subsets of trellis states: a subset is the set of
// states consistent with the observed (all-zero) symbols so far, and each
// observation pattern sends it to the set reachable over allowed branches
struct SubsetMaps {
  std::vector<std::uint32_t> masks;               // subset bitmasks
  std::array<std::vector<std::int32_t>, 4> next;  // next[pattern][index]
  int zero_index = -1;                            // {0}
  int full_index = -1;                            // all states
};

// forward chain on the trellis plus backward chain on the reversed trellis,
// with per-forward-subset reachability masks used by the extrinsic
// ambiguity computation
struct SubsetChain {
  int num_states = 0;
  SubsetMaps forward;
  SubsetMaps backward;
  // states reachable from each forward subset over branches with the
  // given output labels
  std::vector<std::uint32_t> sys1_par0;
  std::vector<std::uint32_t> sys1_any;
  std::vector<std::uint32_t> par1_sys0;
  std::vector<std::uint32_t> par1_any;
};

inline constexpr std::size_t kSubsetClosureCap = 1u << 16;

SubsetChain build_subset_chain(const Trellis& t);

}  // namespace ccgldpc
