#include "ccgldpc/ensemble.hpp"

#include <stdexcept>

namespace ccgldpc {

std::string EnsembleSpec::describe() const {
  std::string s = "(" + std::to_string(dv) + "," + std::to_string(dc) + ")";
  s += conv ? " conv " + conv->label : " ldpc";
  if (coupling)
    s += " m=" + std::to_string(coupling->m) +
         " L=" + std::to_string(coupling->L);
  return s;
}

void validate(const EnsembleSpec& spec) {
  if (spec.dv < 2 || spec.dc <= spec.dv || spec.dc > 64)
    throw std::invalid_argument("need 2 <= dv < dc <= 64, got " +
                                spec.describe());
  if (spec.conv) {
    if ((spec.conv->fb & 1u) == 0)
      throw std::invalid_argument("feedback constant term is zero");
    if (spec.conv->memory() < 1 || spec.conv->memory() > 16)
      throw std::invalid_argument("constraint trellis memory out of range");
  }
  if (spec.coupling) {
    if (spec.coupling->m < 0 || spec.coupling->m > 64)
      throw std::invalid_argument("coupling memory out of range");
    if (spec.coupling->L < 1 || spec.coupling->L > 1000000)
      throw std::invalid_argument("chain length out of range");
  }
}

}  // namespace ccgldpc
