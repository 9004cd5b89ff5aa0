#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "specsep/errors.hpp"
#include "specsep/separation_predictor.hpp"

using namespace specsep;

namespace {

const JointSpectrum kMpSpec({{0.0, 1.0, 1.0}});
const JointSpectrum kTwoAtomSpec({{0.0, 1.0, 0.5}, {8.0, 1.0, 0.5}});

const SpectralGap &gap_with(const std::vector<SpectralGap> &gaps, double x) {
  for (const auto &g : gaps) {
    if (g.contains(x)) return g;
  }
  throw std::runtime_error("no gap contains x");
}

}  // namespace

TEST(HValues, DegenerateLimit) {
  const auto cfg = make_model(kTwoAtomSpec, 1e-6);
  const std::vector<EigenPair> pairs{{0.0, 1.0}, {8.0, 1.0}, {3.0, 2.0}};
  for (double x : {3.0, 5.0, 7.0}) {
    const auto h = h_values(pairs, x, cfg);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      EXPECT_NEAR(h[j], -(pairs[j].u + pairs[j].t) / x, 1e-4);
    }
  }
}

TEST(HValues, MpAboveBulk) {
  // -1/g + 0.25/(1+g) = 2.5 at g = -0.5 exactly.
  EXPECT_DOUBLE_EQ(oracle::mp_x_of_g(-0.5, 0.25), 2.5);
  const auto cfg = make_model(kMpSpec, 0.25);
  const auto h = h_values({{0.0, 1.0}, {0.0, 1.0}}, 2.5, cfg);
  for (double v : h) EXPECT_NEAR(v, -0.5, 1e-7);
}

TEST(HValues, MpBelowBulk) {
  const auto cfg = make_model(kMpSpec, 0.25);
  const auto h = h_values({{0.0, 1.0}}, 0.2, cfg);
  EXPECT_LT(h[0], -2.0);
}

TEST(HValues, RejectsPointInBulk) {
  EXPECT_THROW(h_values({{0.0, 1.0}}, 1.0, make_model(kMpSpec, 0.25)), SeparationError);
}

TEST(PredictCounts, MpUpperGap) {
  const auto cfg = make_model(kMpSpec, 0.25);
  const auto gaps = find_gaps(cfg);
  const auto pairs = materialize_pairs(kMpSpec, 100);
  const auto pred = predict_counts(gap_with(gaps, 3.0), pairs, cfg);
  EXPECT_EQ(pred.count_h_above, 100);
  EXPECT_EQ(pred.count_h_below, 0);
  EXPECT_EQ(pred.sides(), (SideCounts{100, 0}));
  for (const auto &p : pred.profiles) {
    EXPECT_GT(p.h_min, -2.0 / 3.0);
    EXPECT_LT(p.h_max, 0.0);
  }
}

TEST(PredictCounts, MpLowerGap) {
  const auto cfg = make_model(kMpSpec, 0.25);
  const auto gaps = find_gaps(cfg);
  const auto pairs = materialize_pairs(kMpSpec, 100);
  const auto pred = predict_counts(gap_with(gaps, 0.1), pairs, cfg);
  EXPECT_EQ(pred.sides(), (SideCounts{0, 100}));
  for (const auto &p : pred.profiles) EXPECT_LT(p.h_max, -2.0);
}

TEST(PredictCounts, TwoAtomMiddleGapSplits) {
  const auto cfg = make_model(kTwoAtomSpec, 0.05);
  const auto gaps = find_gaps(cfg);
  const auto pairs = materialize_pairs(kTwoAtomSpec, 200);
  const auto pred = predict_counts(gap_with(gaps, 5.0), pairs, cfg);
  EXPECT_EQ(pred.sides(), (SideCounts{100, 100}));
  for (const auto &p : pred.profiles) {
    if (p.pair.u == 8.0) {
      EXPECT_LT(p.h_max, -1.0);
    } else {
      EXPECT_GT(p.h_min, -1.0);
    }
  }
}

TEST(PredictCounts, ConventionsMirror) {
  const auto cfg = make_model(kTwoAtomSpec, 0.1);
  const auto gaps = find_gaps(cfg);
  const auto pairs = materialize_pairs(kTwoAtomSpec, 200);
  const auto d = predict_counts(gaps.back(), pairs, cfg, {}, 5, Convention::derivation);
  const auto t = predict_counts(gaps.back(), pairs, cfg, {}, 5, Convention::theorem);
  EXPECT_EQ(d.count_h_below, t.count_h_below);
  EXPECT_EQ(d.sides().below, t.sides().above);
  EXPECT_EQ(d.sides().above, t.sides().below);
  EXPECT_EQ(d.sides(Convention::theorem), t.sides());
}

TEST(PredictCounts, PartitionOnEveryGap) {
  for (double y : {0.3, 0.1, 0.02}) {
    const JointSpectrum h({{0.0, 1.0, 0.3}, {4.0, 2.0, 0.3}, {10.0, 0.5, 0.4}});
    const auto cfg = make_model(h, y);
    for (int p : {10, 37, 400}) {
      const auto pairs = materialize_pairs(h, p);
      for (const auto &gap : find_gaps(cfg)) {
        const auto pred = predict_counts(gap, pairs, cfg);
        EXPECT_EQ(pred.count_h_below + pred.count_h_above, p);
        EXPECT_EQ(pred.profiles.size(), pairs.size());
        EXPECT_EQ(pred.sample_x.size(), 5u);
      }
    }
  }
}

TEST(PredictCounts, DegenerateLimitCountsAtomLocations) {
  const JointSpectrum h({{0.0, 1.0, 0.3}, {4.0, 2.0, 0.3}, {10.0, 0.5, 0.4}});
  const auto cfg = make_model(h, 1e-4);
  const auto pairs = materialize_pairs(h, 100);
  const auto gaps = find_gaps(cfg);
  ASSERT_EQ(gaps.size(), 4u);
  for (const auto &gap : gaps) {
    const auto pred = predict_counts(gap, pairs, cfg);
    int below = 0, above = 0;
    for (const auto &q : pairs) {
      if (q.u + q.t < gap.a) ++below;
      if (q.u + q.t > (gap.unbounded() ? gap.a : gap.b)) ++above;
    }
    EXPECT_EQ(pred.sides(), (SideCounts{below, above}));
  }
}

TEST(PredictCounts, ScaleCoherence) {
  const JointSpectrum h({{0.0, 1.0, 0.5}, {8.0, 1.0, 0.5}});
  const auto cfg = make_model(h, 0.1);
  const auto pairs = materialize_pairs(h, 200);
  const auto gaps = find_gaps(cfg);
  for (double kappa : {0.25, 3.0}) {
    const auto scfg = make_model(h.scaled(kappa), 0.1);
    const auto spairs = materialize_pairs(scfg.spectrum, 200);
    for (const auto &gap : gaps) {
      SpectralGap sg = gap;
      sg.a *= kappa;
      sg.b *= kappa;
      sg.g_a /= kappa;
      sg.g_b /= kappa;
      if (gap.unbounded()) continue;  // the proxy cut is not scale covariant
      const auto base = predict_counts(gap, pairs, cfg);
      const auto scaled = predict_counts(sg, spairs, scfg);
      EXPECT_EQ(base.count_h_below, scaled.count_h_below);
      EXPECT_EQ(base.count_h_above, scaled.count_h_above);
    }
  }
}

TEST(PredictCounts, RejectsTooFewSamples) {
  const auto cfg = make_model(kMpSpec, 0.25);
  const auto gaps = find_gaps(cfg);
  EXPECT_THROW(predict_counts(gaps[0], {{0.0, 1.0}}, cfg, {}, 2), std::invalid_argument);
}

TEST(PredictCounts, SignChangeIsReported) {
  // A fake "gap" straddling the MP bulk cannot be sampled as a gap.
  const auto cfg = make_model(kMpSpec, 0.25);
  SpectralGap fake{2.0, 3.0, -0.7, -0.4, 0.25};
  EXPECT_THROW(predict_counts(fake, {{0.0, 1.0}}, cfg), SeparationError);
}

TEST(Convention, StringRoundTrip) {
  EXPECT_EQ(convention_from_string("derivation"), Convention::derivation);
  EXPECT_EQ(convention_from_string(to_string(Convention::theorem)), Convention::theorem);
  EXPECT_THROW(convention_from_string("other"), std::invalid_argument);
}
