#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ccgldpc {

// Rate-1/2 recursive systematic convolutional code with parity generator
// ff/fb given in octal.  The binary expansion of each octal value is read
// MSB-first as polynomial coefficients of D^0, D^1, ...:
//   1/3   -> 1 / (1 + D)            (2 states, accumulator)
//   5/7   -> (1 + D^2) / (1 + D + D^2)       (4 states)
//   13/15 -> (1 + D^2 + D^3) / (1 + D + D^3) (8 states)
struct GeneratorSpec {
  // coefficient masks, bit k = coefficient of D^k
  std::uint32_t ff = 1;
  std::uint32_t fb = 3;
  std::string label = "1/3";

  int memory() const;
  int num_states() const { return 1 << memory(); }
  bool operator==(const GeneratorSpec&) const = default;
};

// "5/7" -> GeneratorSpec; octal digits only, trailing zero coefficients are
// not representable (the leading binary 1 is always the D^0 coefficient)
GeneratorSpec parse_generator(const std::string& text);

struct Branch {
  std::uint8_t next = 0;
  std::uint8_t sys = 0;  // systematic output label
  std::uint8_t par = 0;  // parity output label
};

// State encoding: controller canonical shift register, newest bit in
// position 0.  For encoder trellises branches[s][u] is the transition
// taken on input bit u; reversed trellises keep the labels but the slot
// index carries no meaning.
struct Trellis {
  int num_states = 0;
  std::vector<std::array<Branch, 2>> branches;
  GeneratorSpec gen;
};

Trellis build_trellis(const GeneratorSpec& gen);

// branch (s -> s', sys, par) exists in the result iff (s' -> s, sys, par)
// exists in the input
Trellis reverse_trellis(const Trellis& t);

// input bit that drives the register one step toward the zero state
int termination_input(const Trellis& t, int state);

struct TerminatedCodeword {
  std::vector<std::uint8_t> sys;  // info bits followed by tail bits
  std::vector<std::uint8_t> par;  // one parity per section, unpunctured
  int tail_len = 0;
};

// encodes info bits and appends the zero-tail; the final state is zero
TerminatedCodeword encode_terminated(const Trellis& t,
                                     const std::vector<std::uint8_t>& info);

}  // namespace ccgldpc
