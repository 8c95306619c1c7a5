#pragma once

#include <optional>
#include <string>

#include "ccgldpc/trellis.hpp"

namespace ccgldpc {

struct CouplingSpec {
  int m = 1;    // coupling memory, uniform window of width m+1
  int L = 100;  // chain length
  bool operator==(const CouplingSpec&) const = default;
};

// (dv,dc)-regular ensemble whose constraint nodes are either single parity
// checks or punctured terminated convolutional trellises
struct EnsembleSpec {
  int dv = 3;
  int dc = 6;
  std::optional<GeneratorSpec> conv;      // empty = parity-check constraints
  std::optional<CouplingSpec> coupling;   // empty = uncoupled

  double rate() const { return 1.0 - double(dv) / double(dc); }
  bool is_conv() const { return conv.has_value(); }
  bool is_coupled() const { return coupling.has_value(); }
  std::string describe() const;
};

// throws std::invalid_argument on inconsistent parameters
void validate(const EnsembleSpec& spec);

}  // namespace ccgldpc
