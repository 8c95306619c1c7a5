#pragma once

#include <cstdint>
#include <vector>

#include "ccgldpc/ensemble.hpp"
#include "ccgldpc/trellis.hpp"

namespace ccgldpc {

// truncated weight spectrum in the log domain; log_a[w] = log A_w,
// -infinity for empty weights
struct WeightSpectrum {
  int n = 0;  // block length
  int W = 0;  // truncation cap, n >= W
  std::vector<double> log_a;  // size W + 1
};

// input/output weight spectrum of a two-input rate-2/3 terminated
// component trellis: log_a indexed by (i1, i2, p) with i1, i2 <= icap and
// p <= pcap, counting in-block weights only
struct IOWeightSpectrum3 {
  int N = 0;
  int icap = 0;
  int pcap = 0;
  std::vector<double> log_a;

  std::size_t index(int i1, int i2, int p) const {
    return (static_cast<std::size_t>(i1) * (icap + 1) + i2) * (pcap + 1) + p;
  }
  double at(int i1, int i2, int p) const { return log_a[index(i1, i2, p)]; }
};

// two-index ensemble average over (information weight, parity weight)
struct AvgIOWeight {
  int icap = 0;
  int pcap = 0;
  std::vector<double> log_a;

  std::size_t index(int i, int p) const {
    return static_cast<std::size_t>(i) * (pcap + 1) + p;
  }
  double at(int i, int p) const { return log_a[index(i, p)]; }
};

// periodic parity retention: one surviving parity per segment of
// period = d_c - 1 sections, at offset kept_pos (default the first
// section of each segment); period 0 means derive from d_c
struct PuncturePattern {
  int period = 0;
  int kept_pos = 0;
};

// path-counting dynamic program over the zero-terminated punctured
// trellis of (d_c - 1) * N sections; tail bits are included in the weight
// and the block length, with the puncture pattern continuing through the
// tail
WeightSpectrum component_spectrum_conv(const Trellis& t, int N, int dc,
                                       const PuncturePattern& pattern,
                                       int W);
// exact-count variant, restricted to block lengths n <= 48 so every
// count fits an integer double/uint64 exactly
std::vector<std::uint64_t> component_spectrum_conv_exact(
    const Trellis& t, int N, int dc, const PuncturePattern& pattern, int W,
    int* block_length = nullptr);

// coefficients of [((1+x)^dc + (1-x)^dc) / 2]^N up to weight W
WeightSpectrum component_spectrum_ldpc(int N, int dc, int W);
std::vector<std::uint64_t> component_spectrum_ldpc_exact(int N, int dc,
                                                         int W);

// single-edge ensemble average: log avg_w = dv log A_w - (dv-1) log C(n,w)
WeightSpectrum ensemble_avg_single_edge(const WeightSpectrum& a, int dv);

// three-index spectrum of the rate-2/3 component realized as a
// 2N-section punctured trellis whose systematic bits alternate between
// the two input streams; weights of the termination tail are not indexed
IOWeightSpectrum3 component_spectrum_bcc(const Trellis& t, int N,
                                         const PuncturePattern& pattern,
                                         int icap, int pcap);
std::vector<std::uint64_t> component_spectrum_bcc_exact(
    const Trellis& t, int N, const PuncturePattern& pattern, int icap,
    int pcap);

// avg_{i,p} = sum_{p1} A1_{i,p1,p-p1} A2_{i,p-p1,p1} /
//             [C(N,i) C(N,p1) C(N,p-p1)]
AvgIOWeight ensemble_avg_bcc(const IOWeightSpectrum3& a1,
                             const IOWeightSpectrum3& a2, int N);

// collapse to total weight w = i + p over a block of length n
WeightSpectrum collapse_total_weight(const AvgIOWeight& avg, int n);

struct DminBound {
  int d_hat = 1;
  bool truncated = false;  // inequality still held at the cap
};

// largest d with sum_{w=1..d-1} avg_w < 1 - alpha, at most W + 1
DminBound dmin_bound(const WeightSpectrum& avg, double alpha);

struct DminPoint {
  int n = 0;
  int d_hat = 1;
  bool truncated = false;
  int cap_used = 0;
};

// spectrum -> ensemble average -> distance bound per N, doubling the
// truncation cap whenever the bound runs into it; structured_bcc selects
// the two-component average for (2,3) convolutional specs
std::vector<DminPoint> dmin_curve(const EnsembleSpec& spec, double alpha,
                                  const std::vector<int>& block_sections,
                                  int initial_cap = 0,
                                  bool structured_bcc = false);

}  // namespace ccgldpc
