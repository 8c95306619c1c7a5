#include "ccgldpc/trellis.hpp"

#include <bit>
#include <cassert>
#include <stdexcept>

namespace ccgldpc {

namespace {

int degree(std::uint32_t mask) {
  if (mask == 0) return 0;
  return 31 - std::countl_zero(mask);
}

std::uint32_t octal_to_coeff_mask(const std::string& digits) {
  std::uint32_t value = 0;
  if (digits.empty()) throw std::invalid_argument("empty generator field");
  for (char c : digits) {
    if (c < '0' || c > '7')
      throw std::invalid_argument("generator is not octal: " + digits);
    value = value * 8 + std::uint32_t(c - '0');
  }
  if (value == 0) throw std::invalid_argument("zero generator polynomial");
  // binary MSB-first becomes coefficient of D^0 upward
  int len = degree(value) + 1;
  std::uint32_t mask = 0;
  for (int k = 0; k < len; ++k)
    if (value >> (len - 1 - k) & 1u) mask |= 1u << k;
  return mask;
}

std::uint8_t parity_of(std::uint32_t bits) {
  return std::uint8_t(std::popcount(bits) & 1);
}

}  // namespace

int GeneratorSpec::memory() const {
  int dff = degree(ff);
  int dfb = degree(fb);
  return dff > dfb ? dff : dfb;
}

GeneratorSpec parse_generator(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size())
    throw std::invalid_argument("generator must look like \"5/7\": " + text);
  GeneratorSpec g;
  g.ff = octal_to_coeff_mask(text.substr(0, slash));
  g.fb = octal_to_coeff_mask(text.substr(slash + 1));
  g.label = text;
  return g;
}

Trellis build_trellis(const GeneratorSpec& gen) {
  if ((gen.fb & 1u) == 0)
    throw std::invalid_argument("feedback constant term is zero");
  int nu = gen.memory();
  if (nu == 0)
    throw std::invalid_argument("degenerate encoder: memory zero");
  if (nu > 16) throw std::invalid_argument("memory too large");

  Trellis t;
  t.gen = gen;
  t.num_states = 1 << nu;
  t.branches.resize(size_t(t.num_states));

  std::uint32_t mask = std::uint32_t(t.num_states - 1);
  std::uint32_t fb_taps = gen.fb >> 1;  // bit j-1 of the state holds s_j
  std::uint32_t ff_taps = gen.ff >> 1;
  std::uint8_t ff0 = std::uint8_t(gen.ff & 1u);

  for (int s = 0; s < t.num_states; ++s) {
    for (int u = 0; u < 2; ++u) {
      std::uint8_t a = std::uint8_t(u) ^ parity_of(fb_taps & std::uint32_t(s));
      Branch b;
      b.sys = std::uint8_t(u);
      b.par = std::uint8_t((ff0 & a) ^ parity_of(ff_taps & std::uint32_t(s)));
      b.next = std::uint8_t(((std::uint32_t(s) << 1) | a) & mask);
      t.branches[size_t(s)][size_t(u)] = b;
    }
    assert(t.branches[size_t(s)][0].next != t.branches[size_t(s)][1].next);
  }
  assert(t.branches[0][0].next == 0 && t.branches[0][0].par == 0);
  return t;
}

Trellis reverse_trellis(const Trellis& t) {
  Trellis r;
  r.num_states = t.num_states;
  r.gen = t.gen;
  r.branches.resize(size_t(r.num_states));
  std::vector<int> fill(size_t(r.num_states), 0);
  for (int s = 0; s < t.num_states; ++s) {
    for (int u = 0; u < 2; ++u) {
      const Branch& b = t.branches[size_t(s)][size_t(u)];
      Branch rb;
      rb.next = std::uint8_t(s);
      rb.sys = b.sys;
      rb.par = b.par;
      int& slot = fill[b.next];
      if (slot >= 2)
        throw std::runtime_error("trellis is not two-in two-out");
      r.branches[b.next][size_t(slot)] = rb;
      ++slot;
    }
  }
  for (int s = 0; s < r.num_states; ++s)
    if (fill[size_t(s)] != 2)
      throw std::runtime_error("trellis is not two-in two-out");
  return r;
}

int termination_input(const Trellis& t, int state) {
  // choose u so the shifted-in bit a is zero
  std::uint32_t fb_taps = t.gen.fb >> 1;
  return parity_of(fb_taps & std::uint32_t(state));
}

TerminatedCodeword encode_terminated(const Trellis& t,
                                     const std::vector<std::uint8_t>& info) {
  TerminatedCodeword cw;
  int nu = t.gen.memory();
  cw.tail_len = nu;
  cw.sys.reserve(info.size() + size_t(nu));
  cw.par.reserve(info.size() + size_t(nu));
  int state = 0;
  auto step = [&](int u) {
    const Branch& b = t.branches[size_t(state)][size_t(u)];
    cw.sys.push_back(b.sys);
    cw.par.push_back(b.par);
    state = b.next;
  };
  for (std::uint8_t u : info) {
    if (u > 1) throw std::invalid_argument("info bits must be 0/1");
    step(u);
  }
  for (int i = 0; i < nu; ++i) step(termination_input(t, state));
  if (state != 0) throw std::logic_error("termination did not reach zero");
  return cw;
}

}  // namespace ccgldpc
