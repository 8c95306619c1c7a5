#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ccgldpc/transfer.hpp"

using namespace ccgldpc;

namespace {

// closed form for the 2-state accumulator, worked out by hand from the
// two-subset chains {0} and {0,1}:
//   forward:  P(full stays full) = q_p, P({0} -> full) = q_s q_p
//   backward: P(full -> {0}) = (1-q_s)(1-q_p), P({0} -> full) = q_s
TransferPoint accumulator_closed_form(double qs, double qp) {
  double pif = qs * qp / (1.0 - qp + qs * qp);         // P(forward = full)
  double pib = qs / (qs + (1.0 - qs) * (1.0 - qp));    // P(backward = full)
  TransferPoint tp;
  tp.p_s = (1.0 - qp) * pif + qp * (1.0 - (1.0 - pif) * (1.0 - pib));
  tp.p_p = (1.0 - qs) * pif * pib + qs * pib;
  return tp;
}

std::map<std::uint32_t, int> mask_index(const SubsetMaps& m) {
  std::map<std::uint32_t, int> out;
  for (size_t i = 0; i < m.masks.size(); ++i) out[m.masks[i]] = int(i);
  return out;
}

}  // namespace

TEST_CASE("accumulator subset chains match the hand-built tables") {
  SubsetChain c = build_subset_chain(build_trellis(parse_generator("1/3")));
  REQUIRE(c.forward.masks.size() == 2);
  REQUIRE(c.backward.masks.size() == 2);

  auto fi = mask_index(c.forward);
  int f0 = fi.at(0b01), fF = fi.at(0b11);
  auto nxt = [&](const SubsetMaps& m, int pat, int from) {
    return m.next[size_t(pat)][size_t(from)];
  };
  CHECK(nxt(c.forward, kPatBothObserved, f0) == f0);
  CHECK(nxt(c.forward, kPatBothObserved, fF) == f0);
  CHECK(nxt(c.forward, kPatParityErased, f0) == f0);
  CHECK(nxt(c.forward, kPatParityErased, fF) == fF);
  CHECK(nxt(c.forward, kPatSysErased, f0) == f0);
  CHECK(nxt(c.forward, kPatSysErased, fF) == f0);
  CHECK(nxt(c.forward, kPatBothErased, f0) == fF);
  CHECK(nxt(c.forward, kPatBothErased, fF) == fF);

  auto bi = mask_index(c.backward);
  int b0 = bi.at(0b01), bF = bi.at(0b11);
  CHECK(nxt(c.backward, kPatBothObserved, b0) == b0);
  CHECK(nxt(c.backward, kPatBothObserved, bF) == b0);
  CHECK(nxt(c.backward, kPatParityErased, b0) == b0);
  CHECK(nxt(c.backward, kPatParityErased, bF) == bF);
  CHECK(nxt(c.backward, kPatSysErased, b0) == bF);
  CHECK(nxt(c.backward, kPatSysErased, bF) == bF);
  CHECK(nxt(c.backward, kPatBothErased, b0) == bF);
  CHECK(nxt(c.backward, kPatBothErased, bF) == bF);

  // reachability masks driving the ambiguity kernel
  CHECK(c.sys1_par0[size_t(f0)] == 0u);
  CHECK(c.sys1_any[size_t(f0)] == 0b10u);
  CHECK(c.par1_sys0[size_t(f0)] == 0u);
  CHECK(c.par1_any[size_t(f0)] == 0b10u);
  CHECK(c.sys1_par0[size_t(fF)] == 0b01u);
  CHECK(c.sys1_any[size_t(fF)] == 0b11u);
  CHECK(c.par1_sys0[size_t(fF)] == 0b10u);
  CHECK(c.par1_any[size_t(fF)] == 0b10u);
}

TEST_CASE("subset chain structural invariants") {
  for (const char* s : {"1/3", "5/7", "13/15"}) {
    CAPTURE(s);
    SubsetChain c = build_subset_chain(build_trellis(parse_generator(s)));
    for (const SubsetMaps* m : {&c.forward, &c.backward}) {
      CHECK(m->masks.size() >= 2);
      CHECK(m->masks.size() <= 256);
      for (std::uint32_t mask : m->masks) CHECK((mask & 1u) != 0);
      CHECK(m->next[kPatBothErased][size_t(m->full_index)] == m->full_index);
      CHECK(m->next[kPatBothObserved][size_t(m->zero_index)] == m->zero_index);
      for (int p = 0; p < 4; ++p)
        for (size_t i = 0; i < m->masks.size(); ++i) {
          int j = m->next[size_t(p)][i];
          REQUIRE(j >= 0);
          REQUIRE(size_t(j) < m->masks.size());
        }
    }
  }
}

TEST_CASE("transfer function corners are exact") {
  for (const char* s : {"1/3", "5/7", "13/15"}) {
    CAPTURE(s);
    TransferFunction tf(parse_generator(s));
    TransferPoint t00 = tf.eval(0.0, 0.0);
    CHECK(t00.p_s == 0.0);
    CHECK(t00.p_p == 0.0);
    TransferPoint t11 = tf.eval(1.0, 1.0);
    CHECK(t11.p_s == 1.0);
    CHECK(t11.p_p == 1.0);
    TransferPoint t01 = tf.eval(0.0, 1.0);
    CHECK(t01.p_s == 0.0);
    CHECK(t01.p_p == 0.0);
    TransferPoint t10 = tf.eval(1.0, 0.0);
    CHECK(t10.p_s >= 0.0);
    CHECK(t10.p_s <= 1.0);
    CHECK(t10.p_p >= 0.0);
    CHECK(t10.p_p <= 1.0);
  }
}

TEST_CASE("accumulator transfer matches the closed form") {
  TransferFunction tf(parse_generator("1/3"));
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      double qs = i / 10.0, qp = j / 10.0;
      if (qs == 0.0 && qp == 1.0) continue;  // closed form is 0/0 there
      CAPTURE(qs);
      CAPTURE(qp);
      TransferPoint want = accumulator_closed_form(qs, qp);
      TransferPoint got = tf.eval(qs, qp);
      CHECK(std::abs(got.p_s - want.p_s) < 1e-12);
      CHECK(std::abs(got.p_p - want.p_p) < 1e-12);
    }
}

TEST_CASE("stationary distributions are proper and consistent") {
  for (const char* s : {"5/7", "13/15"}) {
    CAPTURE(s);
    TransferFunction tf(parse_generator(s));
    for (double qs : {0.2, 0.6, 0.95})
      for (double qp : {0.05, 0.5, 0.9}) {
        Eigen::VectorXd pf = tf.stationary_forward(qs, qp);
        Eigen::VectorXd pb = tf.stationary_backward(qs, qp);
        CHECK(std::abs(pf.sum() - 1.0) < 1e-12);
        CHECK(std::abs(pb.sum() - 1.0) < 1e-12);
        CHECK(pf.minCoeff() >= 0.0);
        CHECK(pb.minCoeff() >= 0.0);
      }
  }
}

TEST_CASE("transfer is monotone and vanishes when systematics are known") {
  for (const char* s : {"1/3", "5/7", "13/15"}) {
    CAPTURE(s);
    TransferFunction tf(parse_generator(s));

    for (double qp : {0.0, 0.3, 0.7, 0.9}) {
      TransferPoint tp = tf.eval(0.0, qp);
      CHECK(std::abs(tp.p_s) < 1e-12);
      CHECK(std::abs(tp.p_p) < 1e-12);
    }

    const int G = 10;
    std::vector<std::vector<TransferPoint>> grid(G + 1);
    for (int i = 0; i <= G; ++i) {
      grid[size_t(i)].resize(G + 1);
      for (int j = 0; j <= G; ++j)
        grid[size_t(i)][size_t(j)] = tf.eval(i / double(G), j / double(G));
    }
    for (int i = 0; i <= G; ++i)
      for (int j = 0; j <= G; ++j) {
        if (i > 0) {
          CHECK(grid[size_t(i)][size_t(j)].p_s >=
                grid[size_t(i) - 1][size_t(j)].p_s - 1e-12);
          CHECK(grid[size_t(i)][size_t(j)].p_p >=
                grid[size_t(i) - 1][size_t(j)].p_p - 1e-12);
        }
        if (j > 0) {
          CHECK(grid[size_t(i)][size_t(j)].p_s >=
                grid[size_t(i)][size_t(j) - 1].p_s - 1e-12);
          CHECK(grid[size_t(i)][size_t(j)].p_p >=
                grid[size_t(i)][size_t(j) - 1].p_p - 1e-12);
        }
      }
  }
}

TEST_CASE("transfer is continuous under tiny input changes") {
  TransferFunction tf(parse_generator("5/7"));
  for (double qs : {0.2, 0.5, 0.8})
    for (double qp : {0.3, 0.6}) {
      TransferPoint a = tf.eval(qs, qp);
      TransferPoint b = tf.eval(qs + 1e-9, qp - 1e-9);
      CHECK(std::abs(a.p_s - b.p_s) < 1e-6);
      CHECK(std::abs(a.p_p - b.p_p) < 1e-6);
    }
}

TEST_CASE("warm evaluation agrees with the direct solve") {
  for (const char* s : {"1/3", "13/15"}) {
    CAPTURE(s);
    TransferFunction tf(parse_generator(s));
    TransferFunction::WarmState ws;
    // drift along a path the way a DE sweep would
    for (int k = 0; k <= 400; ++k) {
      double qs = 0.9 - 0.8 * k / 400.0;
      double qp = 0.2 + 0.7 * k / 400.0;
      TransferPoint a = tf.eval_warm(qs, qp, ws);
      TransferPoint b = tf.eval(qs, qp);
      REQUIRE(std::abs(a.p_s - b.p_s) < 1e-10);
      REQUIRE(std::abs(a.p_p - b.p_p) < 1e-10);
    }
  }
}

TEST_CASE("monte carlo oracle agrees with the exact transfer") {
  struct Case {
    const char* gen;
    double qs, qp;
  };
  for (Case c : {Case{"1/3", 0.3, 0.6}, Case{"5/7", 0.5, 0.5},
                 Case{"13/15", 0.4, 0.7}}) {
    CAPTURE(c.gen);
    GeneratorSpec g = parse_generator(c.gen);
    TransferFunction tf(g);
    TransferPoint exact = tf.eval(c.qs, c.qp);
    McTransferEstimate mc = mc_transfer_oracle(g, c.qs, c.qp, 1000000, 12345);
    CHECK(std::abs(mc.p_s - exact.p_s) <= 3.0 * mc.se_s);
    CHECK(std::abs(mc.p_p - exact.p_p) <= 3.0 * mc.se_p);
    CHECK(mc.se_s < 2e-3);
    CHECK(mc.se_p < 2e-3);
  }

  GeneratorSpec acc = parse_generator("1/3");
  McTransferEstimate rep1 = mc_transfer_oracle(acc, 0.3, 0.6, 20000, 99);
  McTransferEstimate rep2 = mc_transfer_oracle(acc, 0.3, 0.6, 20000, 99);
  CHECK(rep1.p_s == rep2.p_s);
  CHECK(rep1.p_p == rep2.p_p);

  McTransferEstimate zero = mc_transfer_oracle(acc, 0.0, 0.0, 10000, 1);
  CHECK(zero.p_s == 0.0);
  CHECK(zero.p_p == 0.0);
  McTransferEstimate one = mc_transfer_oracle(acc, 1.0, 1.0, 10000, 1);
  CHECK(one.p_s == 1.0);
  CHECK(one.p_p == 1.0);

  CHECK_THROWS(mc_transfer_oracle(acc, 0.5, 0.5, 100, 1));
  CHECK_THROWS(mc_transfer_oracle(acc, -0.1, 0.5, 10000, 1));
}
