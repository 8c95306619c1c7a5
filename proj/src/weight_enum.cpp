#include "ccgldpc/weight_enum.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "ccgldpc/log_domain.hpp"

namespace ccgldpc {

namespace {

struct LogCounts {
  using value_type = double;
  static double zero() { return kLogZero; }
  static double one() { return 0.0; }
  static double add(double a, double b) { return log_add(a, b); }
  static double mul(double a, double b) { return a + b; }
};

struct ExactCounts {
  using value_type = std::uint64_t;
  static std::uint64_t zero() { return 0; }
  static std::uint64_t one() { return 1; }
  static std::uint64_t add(std::uint64_t a, std::uint64_t b) { return a + b; }
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return a * b; }
};

int resolve_period(const PuncturePattern& pattern, int dc) {
  int period = pattern.period == 0 ? dc - 1 : pattern.period;
  if (period != dc - 1) {
    throw std::invalid_argument("puncture period must equal d_c - 1");
  }
  if (pattern.kept_pos < 0 || pattern.kept_pos >= period) {
    throw std::invalid_argument("kept parity position outside the segment");
  }
  return period;
}

bool parity_kept(long section, int period, int kept_pos) {
  return section % period == kept_pos;
}

// block length of the terminated punctured code: one systematic bit per
// section, one kept parity per segment, with the pattern continuing
// through the nu tail sections
int conv_block_length(int N, int dc, int period, int kept_pos, int nu) {
  long sections = static_cast<long>(period) * N;
  long n = sections + nu + N;
  for (long s = sections; s < sections + nu; ++s) {
    if (parity_kept(s, period, kept_pos)) ++n;
  }
  return static_cast<int>(n);
}

template <class S>
std::vector<typename S::value_type> conv_dp(const Trellis& t, int N, int dc,
                                            const PuncturePattern& pattern,
                                            int W, int* block_length) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  int period = resolve_period(pattern, dc);
  int nu = t.gen.memory();
  long sections = static_cast<long>(period) * N;
  int n = conv_block_length(N, dc, period, pattern.kept_pos, nu);
  if (W < 0 || W > n) {
    throw std::invalid_argument("weight cap exceeds the code length");
  }
  if (block_length != nullptr) *block_length = n;

  using V = typename S::value_type;
  const int ns = t.num_states;
  const std::size_t stride = static_cast<std::size_t>(W) + 1;
  std::vector<V> dp(ns * stride, S::zero());
  std::vector<V> nx(ns * stride);
  dp[0 * stride + 0] = S::one();

  for (long s = 0; s < sections + nu; ++s) {
    bool kept = parity_kept(s, period, pattern.kept_pos);
    bool tail = s >= sections;
    std::fill(nx.begin(), nx.end(), S::zero());
    for (int st = 0; st < ns; ++st) {
      for (int a = 0; a < 2; ++a) {
        if (tail && a != termination_input(t, st)) continue;
        const Branch& b = t.branches[st][a];
        int dw = b.sys + (kept ? b.par : 0);
        for (int w = 0; w + dw <= W; ++w) {
          V& src = dp[st * stride + w];
          if (!(src != S::zero())) continue;
          V& dst = nx[b.next * stride + w + dw];
          dst = S::add(dst, src);
        }
      }
    }
    dp.swap(nx);
  }

  std::vector<V> out(stride);
  for (int w = 0; w <= W; ++w) out[w] = dp[0 * stride + w];
  return out;
}

}  // namespace

WeightSpectrum component_spectrum_conv(const Trellis& t, int N, int dc,
                                       const PuncturePattern& pattern,
                                       int W) {
  WeightSpectrum ws;
  ws.W = W;
  ws.log_a = conv_dp<LogCounts>(t, N, dc, pattern, W, &ws.n);
  assert(ws.log_a[0] == 0.0);
  return ws;
}

std::vector<std::uint64_t> component_spectrum_conv_exact(
    const Trellis& t, int N, int dc, const PuncturePattern& pattern, int W,
    int* block_length) {
  int period = pattern.period == 0 ? dc - 1 : pattern.period;
  int n = conv_block_length(N, dc, period, pattern.kept_pos, t.gen.memory());
  if (n > 48) {
    throw std::invalid_argument("exact counts limited to lengths <= 48");
  }
  return conv_dp<ExactCounts>(t, N, dc, pattern, W, block_length);
}

namespace {

template <class S>
std::vector<typename S::value_type> ldpc_poly(int N, int dc, int W) {
  if (N < 1 || dc < 2) throw std::invalid_argument("need N >= 1, d_c >= 2");
  if (W < 0 || W > dc * N) {
    throw std::invalid_argument("weight cap exceeds the code length");
  }
  using V = typename S::value_type;

  // one parity check over dc bits: counts C(dc, j) for even j
  std::vector<V> check(std::min(dc, W) + 1, S::zero());
  {
    std::uint64_t c = 1;
    for (int j = 0; j <= dc; ++j) {
      if (j % 2 == 0 && j <= W) {
        if constexpr (std::is_same_v<V, double>) {
          check[j] = std::log(static_cast<double>(c));
        } else {
          check[j] = c;
        }
      }
      c = c * (dc - j) / (j + 1);
    }
  }

  std::vector<V> acc(W + 1, S::zero());
  acc[0] = S::one();
  std::vector<V> nx(W + 1);
  for (int rep = 0; rep < N; ++rep) {
    std::fill(nx.begin(), nx.end(), S::zero());
    for (int w = 0; w <= W; ++w) {
      if (!(acc[w] != S::zero())) continue;
      for (int j = 0; j < static_cast<int>(check.size()) && w + j <= W;
           ++j) {
        if (!(check[j] != S::zero())) continue;
        nx[w + j] = S::add(nx[w + j], S::mul(acc[w], check[j]));
      }
    }
    acc.swap(nx);
  }
  return acc;
}

}  // namespace

WeightSpectrum component_spectrum_ldpc(int N, int dc, int W) {
  WeightSpectrum ws;
  ws.n = dc * N;
  ws.W = W;
  ws.log_a = ldpc_poly<LogCounts>(N, dc, W);
  return ws;
}

std::vector<std::uint64_t> component_spectrum_ldpc_exact(int N, int dc,
                                                         int W) {
  if (dc * N > 48) {
    throw std::invalid_argument("exact counts limited to lengths <= 48");
  }
  return ldpc_poly<ExactCounts>(N, dc, W);
}

WeightSpectrum ensemble_avg_single_edge(const WeightSpectrum& a, int dv) {
  if (dv < 1) throw std::invalid_argument("d_v must be at least 1");
  WeightSpectrum avg;
  avg.n = a.n;
  avg.W = a.W;
  avg.log_a.resize(a.log_a.size());
  for (int w = 0; w <= a.W; ++w) {
    avg.log_a[w] = dv * a.log_a[w] - (dv - 1) * log_choose(a.n, w);
  }
  return avg;
}

namespace {

template <class S>
std::vector<typename S::value_type> bcc_dp(const Trellis& t, int N,
                                           const PuncturePattern& pattern,
                                           int icap, int pcap) {
  if (N < 1) throw std::invalid_argument("N must be at least 1");
  int period = resolve_period(pattern, 3);
  if (icap < 0 || icap > N || pcap < 0 || pcap > N) {
    throw std::invalid_argument("index caps must lie in [0, N]");
  }
  int nu = t.gen.memory();
  long sections = 2L * N;

  using V = typename S::value_type;
  const int ns = t.num_states;
  const std::size_t per_state =
      static_cast<std::size_t>(icap + 1) * (icap + 1) * (pcap + 1);
  auto cell = [&](int i1, int i2, int p) {
    return (static_cast<std::size_t>(i1) * (icap + 1) + i2) * (pcap + 1) + p;
  };
  std::vector<V> dp(ns * per_state, S::zero());
  std::vector<V> nx(ns * per_state);
  dp[0] = S::one();

  for (long s = 0; s < sections + nu; ++s) {
    bool kept = s < sections && parity_kept(s, period, pattern.kept_pos);
    bool tail = s >= sections;
    bool stream1 = s % 2 == 0;
    std::fill(nx.begin(), nx.end(), S::zero());
    for (int st = 0; st < ns; ++st) {
      const V* src_state = &dp[st * per_state];
      for (int a = 0; a < 2; ++a) {
        if (tail && a != termination_input(t, st)) continue;
        const Branch& b = t.branches[st][a];
        int di1 = 0, di2 = 0, dpw = 0;
        if (!tail) {  // tail bits are not indexed: in-block weights only
          di1 = stream1 ? b.sys : 0;
          di2 = stream1 ? 0 : b.sys;
          dpw = kept ? b.par : 0;
        }
        V* dst_state = &nx[b.next * per_state];
        for (int i1 = 0; i1 + di1 <= icap; ++i1) {
          for (int i2 = 0; i2 + di2 <= icap; ++i2) {
            for (int p = 0; p + dpw <= pcap; ++p) {
              const V& src = src_state[cell(i1, i2, p)];
              if (!(src != S::zero())) continue;
              V& dst = dst_state[cell(i1 + di1, i2 + di2, p + dpw)];
              dst = S::add(dst, src);
            }
          }
        }
      }
    }
    dp.swap(nx);
  }

  std::vector<V> out(per_state);
  std::copy(dp.begin(), dp.begin() + per_state, out.begin());
  return out;
}

}  // namespace

IOWeightSpectrum3 component_spectrum_bcc(const Trellis& t, int N,
                                         const PuncturePattern& pattern,
                                         int icap, int pcap) {
  IOWeightSpectrum3 s3;
  s3.N = N;
  s3.icap = icap;
  s3.pcap = pcap;
  s3.log_a = bcc_dp<LogCounts>(t, N, pattern, icap, pcap);
  return s3;
}

std::vector<std::uint64_t> component_spectrum_bcc_exact(
    const Trellis& t, int N, const PuncturePattern& pattern, int icap,
    int pcap) {
  if (3 * N > 48) {
    throw std::invalid_argument("exact counts limited to lengths <= 48");
  }
  return bcc_dp<ExactCounts>(t, N, pattern, icap, pcap);
}

AvgIOWeight ensemble_avg_bcc(const IOWeightSpectrum3& a1,
                             const IOWeightSpectrum3& a2, int N) {
  if (a1.N != N || a2.N != N || a1.icap != a2.icap || a1.pcap != a2.pcap) {
    throw std::invalid_argument("component spectra disagree on N or caps");
  }
  const int cap = std::min(a1.icap, a1.pcap);

  AvgIOWeight avg;
  avg.icap = a1.icap;
  avg.pcap = 2 * cap;
  avg.log_a.assign(static_cast<std::size_t>(avg.icap + 1) * (avg.pcap + 1),
                   kLogZero);
  for (int i = 0; i <= avg.icap; ++i) {
    double log_ci = log_choose(N, i);
    for (int p = 0; p <= avg.pcap; ++p) {
      double acc = kLogZero;
      int lo = std::max(0, p - cap);
      int hi = std::min(cap, p);
      for (int p1 = lo; p1 <= hi; ++p1) {
        int p2 = p - p1;
        double term = a1.at(i, p1, p2) + a2.at(i, p2, p1) - log_ci -
                      log_choose(N, p1) - log_choose(N, p2);
        acc = log_add(acc, term);
      }
      avg.log_a[avg.index(i, p)] = acc;
    }
  }
  return avg;
}

WeightSpectrum collapse_total_weight(const AvgIOWeight& avg, int n) {
  WeightSpectrum ws;
  ws.n = n;
  ws.W = std::min(n, avg.icap + avg.pcap);
  ws.log_a.assign(ws.W + 1, kLogZero);
  for (int i = 0; i <= avg.icap; ++i) {
    for (int p = 0; p <= avg.pcap; ++p) {
      if (i + p > ws.W) continue;
      ws.log_a[i + p] = log_add(ws.log_a[i + p], avg.at(i, p));
    }
  }
  return ws;
}

DminBound dmin_bound(const WeightSpectrum& avg, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  const double log_target = std::log1p(-alpha);
  double log_cum = kLogZero;
  for (int w = 1; w <= avg.W; ++w) {
    log_cum = log_add(log_cum, avg.log_a[w]);
    if (log_cum >= log_target) return {w, false};
  }
  return {avg.W + 1, true};
}

namespace {

DminPoint dmin_point(const EnsembleSpec& spec, double alpha, int N,
                     int initial_cap, bool structured_bcc) {
  const int dc = spec.dc;
  DminPoint pt;
  if (structured_bcc) {
    if (!spec.is_conv() || spec.dv != 2 || dc != 3) {
      throw std::invalid_argument(
          "two-component average requires a (2,3) convolutional spec");
    }
    Trellis t = build_trellis(*spec.conv);
    int cap = std::clamp(initial_cap > 0 ? initial_cap : 24, 1, N);
    for (;;) {
      IOWeightSpectrum3 s3 = component_spectrum_bcc(t, N, {}, cap, cap);
      AvgIOWeight avg = ensemble_avg_bcc(s3, s3, N);
      WeightSpectrum total = collapse_total_weight(avg, 3 * N);
      DminBound b = dmin_bound(total, alpha);
      pt = {3 * N, b.d_hat, b.truncated, total.W};
      if (!b.truncated || cap == N) return pt;
      cap = std::min(N, 2 * cap);
    }
  }

  Trellis t = spec.is_conv() ? build_trellis(*spec.conv) : Trellis{};
  int full = spec.is_conv()
                 ? conv_block_length(N, dc, dc - 1, 0, t.gen.memory())
                 : dc * N;
  int cap = std::clamp(initial_cap > 0 ? initial_cap : 64, 1, full);
  for (;;) {
    WeightSpectrum a = spec.is_conv()
                           ? component_spectrum_conv(t, N, dc, {}, cap)
                           : component_spectrum_ldpc(N, dc, cap);
    WeightSpectrum avg = ensemble_avg_single_edge(a, spec.dv);
    DminBound b = dmin_bound(avg, alpha);
    pt = {a.n, b.d_hat, b.truncated, cap};
    if (!b.truncated || cap == full) return pt;
    cap = std::min(full, 2 * cap);
  }
}

}  // namespace

std::vector<DminPoint> dmin_curve(const EnsembleSpec& spec, double alpha,
                                  const std::vector<int>& block_sections,
                                  int initial_cap, bool structured_bcc) {
  validate(spec);
  if (spec.is_coupled()) {
    throw std::invalid_argument("distance curves apply to uncoupled specs");
  }
  std::vector<DminPoint> out;
  out.reserve(block_sections.size());
  for (int N : block_sections) {
    out.push_back(dmin_point(spec, alpha, N, initial_cap, structured_bcc));
  }
  return out;
}

}  // namespace ccgldpc
