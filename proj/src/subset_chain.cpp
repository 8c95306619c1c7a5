#include "ccgldpc/subset_chain.hpp"

#include <bit>
#include <cassert>
#include <stdexcept>
#include <unordered_map>

namespace ccgldpc {

namespace {

bool branch_allowed(const Branch& b, int pattern) {
  if ((pattern & 2) == 0 && b.sys != 0) return false;
  if ((pattern & 1) == 0 && b.par != 0) return false;
  return true;
}

SubsetMaps build_maps(const Trellis& t) {
  int S = t.num_states;
  std::uint32_t full = (S >= 32) ? ~0u : ((1u << S) - 1u);

  // image of a single state under each pattern
  std::array<std::vector<std::uint32_t>, 4> step;
  for (int p = 0; p < 4; ++p) {
    step[p].assign(size_t(S), 0u);
    for (int s = 0; s < S; ++s)
      for (int u = 0; u < 2; ++u) {
        const Branch& b = t.branches[size_t(s)][size_t(u)];
        if (branch_allowed(b, p)) step[p][size_t(s)] |= 1u << b.next;
      }
  }

  auto image = [&](std::uint32_t mask, int p) {
    std::uint32_t out = 0;
    while (mask) {
      int s = std::countr_zero(mask);
      mask &= mask - 1;
      out |= step[p][size_t(s)];
    }
    return out;
  };

  SubsetMaps maps;
  std::unordered_map<std::uint32_t, int> index;
  auto intern = [&](std::uint32_t mask) {
    auto it = index.find(mask);
    if (it != index.end()) return it->second;
    if (maps.masks.size() >= kSubsetClosureCap)
      throw std::runtime_error("subset closure exceeds cap");
    int id = int(maps.masks.size());
    maps.masks.push_back(mask);
    index.emplace(mask, id);
    return id;
  };

  maps.full_index = intern(full);
  maps.zero_index = intern(1u);
  for (size_t i = 0; i < maps.masks.size(); ++i) {
    std::uint32_t mask = maps.masks[i];
    for (int p = 0; p < 4; ++p) {
      std::uint32_t img = image(mask, p);
      // every subset carries the all-zero path, so images stay nonempty
      assert(img & 1u);
      int id = intern(img);
      for (int pp = 0; pp < 4; ++pp)
        if (maps.next[size_t(pp)].size() < maps.masks.size())
          maps.next[size_t(pp)].resize(maps.masks.size(), -1);
      maps.next[size_t(p)][i] = id;
    }
  }
  assert(maps.next[3][size_t(maps.full_index)] == maps.full_index);
  return maps;
}

}  // namespace

SubsetChain build_subset_chain(const Trellis& t) {
  SubsetChain c;
  c.num_states = t.num_states;
  c.forward = build_maps(t);
  c.backward = build_maps(reverse_trellis(t));

  size_t n = c.forward.masks.size();
  c.sys1_par0.assign(n, 0u);
  c.sys1_any.assign(n, 0u);
  c.par1_sys0.assign(n, 0u);
  c.par1_any.assign(n, 0u);
  for (size_t i = 0; i < n; ++i) {
    std::uint32_t mask = c.forward.masks[i];
    while (mask) {
      int s = std::countr_zero(mask);
      mask &= mask - 1;
      for (int u = 0; u < 2; ++u) {
        const Branch& b = t.branches[size_t(s)][size_t(u)];
        std::uint32_t bit = 1u << b.next;
        if (b.sys) {
          c.sys1_any[i] |= bit;
          if (!b.par) c.sys1_par0[i] |= bit;
        }
        if (b.par) {
          c.par1_any[i] |= bit;
          if (!b.sys) c.par1_sys0[i] |= bit;
        }
      }
    }
  }
  return c;
}

}  // namespace ccgldpc
