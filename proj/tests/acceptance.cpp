#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccgldpc/density_evolution.hpp"
#include "ccgldpc/ensemble.hpp"
#include "ccgldpc/log_domain.hpp"
#include "ccgldpc/thresholds.hpp"
#include "ccgldpc/transfer.hpp"
#include "ccgldpc/trellis.hpp"
#include "ccgldpc/weight_enum.hpp"

using namespace ccgldpc;

namespace {

constexpr double kTolLdpcBp = 5e-4;     // criterion 1
constexpr double kTolConvBp = 1e-3;     // criterion 2
constexpr double kTolMap = 1e-3;        // criterion 3
constexpr double kTolCoupled = 1e-3;    // criterion 4
constexpr double kTolSaturation = 2e-3; // criterion 5
constexpr double kMonotoneSlack = 2.5e-4; // criterion 5, two bisections of wobble
constexpr double kBpResolution = 2e-5;
constexpr double kCoupledResolution = 1e-4;
constexpr double kMapResolution = 2e-4;
constexpr double kMcSigma = 3.0;        // criterion 6
constexpr long kMcSections = 1000000;
constexpr double kLogRelTol = 1e-9;     // criterion 7

const char* kGenLabels[3] = {"1/3", "5/7", "13/15"};

struct Graph {
  int dv, dc;
};
const Graph kGraphs[6] = {{2, 3}, {4, 6}, {6, 9}, {2, 4}, {3, 6}, {4, 8}};

EnsembleSpec make_spec(int dv, int dc, const char* comp) {
  EnsembleSpec s;
  s.dv = dv;
  s.dc = dc;
  if (std::string(comp) != "ldpc") s.conv = parse_generator(comp);
  return s;
}

EnsembleSpec coupled(EnsembleSpec s, int m) {
  s.coupling = CouplingSpec{m, 100};
  return s;
}

std::string key_of(const EnsembleSpec& s) { return s.describe(); }

std::map<std::string, double> bp_cache;
std::map<std::string, double> map_cache;

double bp_value(const EnsembleSpec& s, const BisectionBracket& seed = {}) {
  auto it = bp_cache.find(key_of(s));
  if (it != bp_cache.end()) return it->second;
  ThresholdResult r = bp_threshold(
      s, s.is_coupled() ? kCoupledResolution : kBpResolution, {}, seed);
  std::fprintf(stderr, "  bp %-28s = %.6f  (%ld runs, L=%d)\n",
               key_of(s).c_str(), r.value, r.de_runs, r.chain_length);
  bp_cache[key_of(s)] = r.value;
  return r.value;
}

double map_value(const EnsembleSpec& s) {
  auto it = map_cache.find(key_of(s));
  if (it != map_cache.end()) return it->second;
  MapThresholdResult r = map_threshold(s, kMapResolution, {});
  std::fprintf(stderr, "  map %-28s = %.6f\n", key_of(s).c_str(), r.value);
  map_cache[key_of(s)] = r.value;
  return r.value;
}

struct Criterion {
  bool ok = true;
  std::vector<std::string> details;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      details.push_back(what);
    }
  }
  void note(const std::string& what) { details.push_back(what); }
};

void report(int number, const char* title, const Criterion& c,
            bool gated, int& failures) {
  const char* tag = !gated ? "REPT" : c.ok ? "PASS" : "FAIL";
  std::printf("[%s] criterion %d: %s\n", tag, number, title);
  for (const std::string& d : c.details) {
    std::printf("       %s\n", d.c_str());
  }
  if (gated && !c.ok) ++failures;
  std::fflush(stdout);
}

// an exception inside one criterion must not take down the rest of the run
template <typename Fn>
Criterion guarded(Fn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    Criterion c;
    c.expect(false, std::string("aborted: ") + e.what());
    return c;
  }
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// ---- criterion 1: uncoupled BP, LDPC components with dv >= 3 ----

Criterion criterion1() {
  Criterion c;
  struct Case {
    int dv, dc;
    double want;
  };
  for (Case t : {Case{3, 6, 0.4294}, Case{4, 6, 0.5061}, Case{4, 8, 0.3834},
                 Case{6, 9, 0.4034}}) {
    double got = bp_value(make_spec(t.dv, t.dc, "ldpc"));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%d,%d) ldpc bp %.6f vs %.4f", t.dv,
                  t.dc, got, t.want);
    c.expect(std::abs(got - t.want) <= kTolLdpcBp, buf);
  }
  return c;
}

// ---- criterion 2: uncoupled BP, all 18 convolutional cells ----

Criterion criterion2() {
  Criterion c;
  const double want[6][3] = {{0.6086, 0.5618, 0.5352},
                             {0.5339, 0.4464, 0.4041},
                             {0.4698, 0.3853, 0.3401},
                             {0.3234, 0.4426, 0.4249},
                             {0.4110, 0.3929, 0.3638},
                             {0.3916, 0.3555, 0.3225}};
  for (int g = 0; g < 6; ++g) {
    for (int j = 0; j < 3; ++j) {
      double got =
          bp_value(make_spec(kGraphs[g].dv, kGraphs[g].dc, kGenLabels[j]));
      char buf[128];
      std::snprintf(buf, sizeof(buf), "(%d,%d) %s bp %.6f vs %.4f",
                    kGraphs[g].dv, kGraphs[g].dc, kGenLabels[j], got,
                    want[g][j]);
      c.expect(std::abs(got - want[g][j]) <= kTolConvBp, buf);
    }
  }
  return c;
}

// ---- criterion 3: area-theorem MAP thresholds, sampled cells ----

Criterion criterion3() {
  Criterion c;
  struct Case {
    int dv, dc;
    const char* comp;
    double want;
  };
  for (Case t : {Case{3, 6, "ldpc", 0.4883}, Case{4, 8, "ldpc", 0.4978},
                 Case{2, 3, "1/3", 0.6213}, Case{4, 6, "5/7", 0.6662},
                 Case{6, 9, "13/15", 0.6666}}) {
    double got = map_value(make_spec(t.dv, t.dc, t.comp));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%d,%d) %s map %.6f vs %.4f", t.dv,
                  t.dc, t.comp, got, t.want);
    c.expect(std::abs(got - t.want) <= kTolMap, buf);
  }
  return c;
}

// ---- coupled sweep shared by criteria 4 and 5 ----

// largest memory listed per (graph, component); same order as kGraphs
const int kCoupledMemoryMax[6][4] = {
    // 1/3  5/7  13/15  ldpc
    {1, 3, 4, 1},  // (2,3)
    {4, 4, 4, 5},  // (4,6)
    {4, 5, 7, 4},  // (6,9)
    {1, 2, 3, 1},  // (2,4)
    {2, 3, 4, 2},  // (3,6)
    {2, 3, 4, 2},  // (4,8)
};

// walk each family in order of increasing memory so the previous value
// seeds a narrow bracket; the caller needs the MAP value for the hi end
void sweep_family(const EnsembleSpec& base, int m_max) {
  double prev = -1.0;
  double hi = map_value(base) + 5e-3;
  for (int m = 1; m <= m_max; ++m) {
    BisectionBracket seed;
    if (prev > 0.0) {
      seed.lo = std::max(0.0, prev - kTolSaturation);
      seed.hi = std::min(1.0, hi);
    }
    prev = bp_value(coupled(base, m), seed);
  }
}

// ---- criterion 4: coupled thresholds, sampled cells ----

Criterion criterion4() {
  Criterion c;
  sweep_family(make_spec(3, 6, "ldpc"), 2);
  sweep_family(make_spec(4, 6, "5/7"), 4);
  sweep_family(make_spec(6, 9, "13/15"), 7);

  struct Case {
    int dv, dc;
    const char* comp;
    int m;
    double want;
  };
  for (Case t :
       {Case{3, 6, "ldpc", 1, 0.4880}, Case{3, 6, "ldpc", 2, 0.4881},
        Case{4, 6, "5/7", 1, 0.6351}, Case{4, 6, "5/7", 4, 0.6662},
        Case{6, 9, "13/15", 7, 0.6665}}) {
    double got = bp_value(coupled(make_spec(t.dv, t.dc, t.comp), t.m));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%d,%d) %s m=%d bp %.6f vs %.4f",
                  t.dv, t.dc, t.comp, t.m, got, t.want);
    c.expect(std::abs(got - t.want) <= kTolCoupled, buf);
  }
  return c;
}

// ---- criterion 5: threshold saturation across every coupled family ----

Criterion criterion5() {
  Criterion c;
  for (int g = 0; g < 6; ++g) {
    for (int j = 0; j < 3; ++j) {
      EnsembleSpec base =
          make_spec(kGraphs[g].dv, kGraphs[g].dc, kGenLabels[j]);
      int m_max = kCoupledMemoryMax[g][j];
      sweep_family(base, m_max);

      double prev = -1.0;
      for (int m = 1; m <= m_max; ++m) {
        double v = bp_value(coupled(base, m));
        if (prev > 0.0) {
          char buf[160];
          std::snprintf(buf, sizeof(buf),
                        "(%d,%d) %s not nondecreasing: m=%d %.6f after %.6f",
                        base.dv, base.dc, kGenLabels[j], m, v, prev);
          c.expect(v >= prev - kMonotoneSlack, buf);
        }
        prev = v;
      }
      double mapv = map_value(base);
      char buf[160];
      std::snprintf(
          buf, sizeof(buf),
          "(%d,%d) %s m=%d bp %.6f vs map %.6f (gap %.4f > %.0e)",
          base.dv, base.dc, kGenLabels[j], m_max, prev, mapv,
          std::abs(prev - mapv), kTolSaturation);
      c.expect(std::abs(prev - mapv) <= kTolSaturation, buf);
    }
  }
  return c;
}

// ---- criterion 6: exact transfer function versus sampling ----

Criterion criterion6() {
  Criterion c;
  for (const char* label : kGenLabels) {
    GeneratorSpec gen = parse_generator(label);
    TransferFunction tf(gen);

    TransferPoint zero = tf.eval(0.0, 0.0);
    c.expect(zero.p_s == 0.0 && zero.p_p == 0.0,
             std::string(label) + " (0,0) corner not exact");
    TransferPoint one = tf.eval(1.0, 1.0);
    c.expect(one.p_s == 1.0 && one.p_p == 1.0,
             std::string(label) + " (1,1) corner not exact");

    for (double qs : {0.25, 0.5, 0.75}) {
      for (double qp : {0.25, 0.5, 0.75}) {
        TransferPoint exact = tf.eval(qs, qp);
        McTransferEstimate mc =
            mc_transfer_oracle(gen, qs, qp, kMcSections, 20260823);
        double ds = std::abs(exact.p_s - mc.p_s);
        double dp = std::abs(exact.p_p - mc.p_p);
        char buf[192];
        std::snprintf(buf, sizeof(buf),
                      "%s q=(%.2f,%.2f): |d_s|=%.2e (3se %.2e) "
                      "|d_p|=%.2e (3se %.2e)",
                      label, qs, qp, ds, kMcSigma * mc.se_s, dp,
                      kMcSigma * mc.se_p);
        c.expect(ds <= kMcSigma * mc.se_s && dp <= kMcSigma * mc.se_p,
                 buf);
      }
    }
  }
  return c;
}

// ---- criterion 7: spectrum equals exhaustive encoding ----

std::vector<double> brute_spectrum(const Trellis& t, int N, int dc) {
  const int free_sections = (dc - 1) * N;
  const int period = dc - 1;
  std::vector<double> counts;
  for (std::uint64_t u = 0; u < (1ull << free_sections); ++u) {
    int w = 0;
    int state = 0;
    for (int s = 0; s < free_sections; ++s) {
      int in = (u >> s) & 1;
      const Branch& b = t.branches[state][in];
      w += b.sys;
      if (s % period == 0) w += b.par;
      state = b.next;
    }
    for (int s = free_sections; s < free_sections + t.gen.memory(); ++s) {
      int in = termination_input(t, state);
      const Branch& b = t.branches[state][in];
      w += b.sys;
      if (s % period == 0) w += b.par;
      state = b.next;
    }
    if (static_cast<int>(counts.size()) <= w) counts.resize(w + 1, 0.0);
    counts[w] += 1.0;
  }
  return counts;
}

Criterion criterion7() {
  Criterion c;
  for (const char* label : kGenLabels) {
    GeneratorSpec gen = parse_generator(label);
    Trellis t = build_trellis(gen);
    for (int dc : {3, 4}) {
      for (int N : {3, 4, 5, 6}) {
        std::vector<double> brute = brute_spectrum(t, N, dc);
        std::vector<std::uint64_t> exact =
            component_spectrum_conv_exact(t, N, dc, {}, 0);
        WeightSpectrum logd = component_spectrum_conv(t, N, dc, {}, 0);
        bool same = true;
        double worst_rel = 0.0;
        for (int w = 0; w <= logd.W; ++w) {
          double want =
              w < static_cast<int>(brute.size()) ? brute[w] : 0.0;
          double got = w < static_cast<int>(exact.size())
                           ? static_cast<double>(exact[w])
                           : 0.0;
          if (std::abs(got - want) > 0.5) same = false;
          if (want > 0.0) {
            double rel = std::abs(logd.log_a[w] - std::log(want)) /
                         std::max(1.0, std::abs(std::log(want)));
            worst_rel = std::max(worst_rel, rel);
          } else if (logd.log_a[w] != kLogZero) {
            same = false;
          }
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%s dc=%d N=%d: exhaustive mismatch or log drift "
                      "%.2e",
                      label, dc, N, worst_rel);
        c.expect(same && worst_rel <= kLogRelTol, buf);
      }
    }
  }
  return c;
}

// ---- criterion 8: distance-bound orderings at matched lengths ----

int dhat_of(const EnsembleSpec& s, int N) {
  return dmin_curve(s, 0.5, {N}, 0, false)[0].d_hat;
}

Criterion criterion8() {
  Criterion c;
  // sections per graph family chosen so n lands near 144, 192, 240; the
  // dv=2 versus dv>=3 comparisons need n >~ 130 before the weakest
  // dv>=3 bound leaves d=2
  const int kSections[6][3] = {{48, 64, 80}, {24, 32, 40}, {16, 21, 27},
                               {36, 48, 60}, {24, 32, 40}, {18, 24, 30}};
  int d[6][4][3];  // graph, component, length index
  for (int g = 0; g < 6; ++g) {
    for (int j = 0; j < 4; ++j) {
      const char* comp = j < 3 ? kGenLabels[j] : "ldpc";
      EnsembleSpec s = make_spec(kGraphs[g].dv, kGraphs[g].dc, comp);
      for (int l = 0; l < 3; ++l) {
        d[g][j][l] = dhat_of(s, kSections[g][l]);
      }
    }
  }
  const int kTargets[3] = {144, 192, 240};

  // quoted ordering: 4-state (3,6) beats 2-state (4,8)
  for (int l = 0; l < 3; ++l) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "n~%d: (3,6) 5/7 d=%d not above (4,8) 1/3 d=%d",
                  kTargets[l], d[4][1][l], d[5][0][l]);
    c.expect(d[4][1][l] > d[5][0][l], buf);
  }

  // more trellis states never hurt at fixed degrees
  for (int g = 0; g < 6; ++g) {
    for (int l = 0; l < 3; ++l) {
      for (int j = 0; j + 1 < 3; ++j) {
        char buf[160];
        std::snprintf(
            buf, sizeof(buf),
            "(%d,%d) n~%d: %s d=%d above %s d=%d", kGraphs[g].dv,
            kGraphs[g].dc, kTargets[l], kGenLabels[j], d[g][j][l],
            kGenLabels[j + 1], d[g][j + 1][l]);
        c.expect(d[g][j][l] <= d[g][j + 1][l], buf);
      }
    }
  }

  // dv=2 ensembles sit strictly below the equal-rate, equal-component
  // ensembles with dv>=3
  const int kDv2[2] = {0, 3};            // (2,3), (2,4)
  const int kRateMates[2][2] = {{1, 2},  // (4,6), (6,9)
                                {4, 5}}; // (3,6), (4,8)
  for (int r = 0; r < 2; ++r) {
    for (int j = 0; j < 4; ++j) {
      for (int l = 0; l < 3; ++l) {
        int weak = d[kDv2[r]][j][l];
        for (int mate : kRateMates[r]) {
          char buf[160];
          const char* comp = j < 3 ? kGenLabels[j] : "ldpc";
          std::snprintf(buf, sizeof(buf),
                        "%s n~%d: (%d,%d) d=%d not below (%d,%d) d=%d",
                        comp, kTargets[l], kGraphs[kDv2[r]].dv,
                        kGraphs[kDv2[r]].dc, weak, kGraphs[mate].dv,
                        kGraphs[mate].dc, d[mate][j][l]);
          c.expect(weak < d[mate][j][l], buf);
        }
      }
    }
  }
  return c;
}

// ---- criterion 9: dv=2 ldpc rows, reported but not gated ----

Criterion criterion9() {
  Criterion c;
  for (Graph g : {Graph{2, 3}, Graph{2, 4}}) {
    EnsembleSpec s = make_spec(g.dv, g.dc, "ldpc");
    double bp = bp_value(s);
    double map = map_value(s);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "(%d,%d) ldpc bp=%.4f map=%.4f under the bit-erasure "
                  "convergence criterion (criterion=bit-erasure-DE)",
                  g.dv, g.dc, bp, map);
    c.note(buf);
  }
  return c;
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "uncoupled BP thresholds of dv>=3 single-parity-check "
            "ensembles within 5e-4 of references",
         guarded(criterion1), true, failures);
  report(2, "uncoupled BP thresholds of all 18 convolutional-component "
            "cells within 1e-3 of references",
         guarded(criterion2), true, failures);
  report(3, "area-theorem MAP thresholds of sampled cells within 1e-3 "
            "of references",
         guarded(criterion3), true, failures);
  report(4, "coupled thresholds of sampled cells within 1e-3 of "
            "references under the chain-doubling stability rule",
         guarded(criterion4), true, failures);
  report(5, "coupled thresholds nondecreasing in memory and within 2e-3 "
            "of the uncoupled MAP value at the largest memory",
         guarded(criterion5), true, failures);
  report(6, "exact transfer function within 3 standard errors of "
            "sampled estimates at 1e6 sections; corners exact",
         guarded(criterion6), true, failures);
  report(7, "component weight spectra equal exhaustive encoding; exact "
            "and log-domain pipelines agree to 1e-9",
         guarded(criterion7), true, failures);
  report(8, "distance-bound orderings hold at matched block lengths",
         guarded(criterion8), true, failures);
  report(9, "dv=2 single-parity-check thresholds reported with the "
            "bit-erasure criterion note",
         guarded(criterion9), false, failures);

  if (failures > 0) {
    std::printf("%d of 8 gated criteria failed\n", failures);
    return 1;
  }
  std::printf("all gated criteria passed\n");
  return 0;
}
