#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "specsep/errors.hpp"
#include "specsep/spectrum_model.hpp"

using namespace specsep;

namespace {

JointSpectrum random_spectrum(std::mt19937_64 &rng, int max_atoms = 5) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int k = count(rng);
  std::vector<SpectrumAtom> atoms;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    atoms.push_back({std::floor(10.0 * uni(rng)) + i * 0.01, 0.1 + 3.0 * uni(rng),
                     0.05 + uni(rng)});
    total += atoms.back().weight;
  }
  for (auto &a : atoms) a.weight /= total;
  // Renormalizing can leave the sum 1 ulp-ish away; push the slack into the
  // last atom so the 1e-12 check is met deterministically.
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) rest -= atoms[i].weight;
  atoms.back().weight = rest;
  return JointSpectrum(atoms);
}

}  // namespace

TEST(Validate, AcceptsPointMass) {
  EXPECT_NO_THROW(validate(JointSpectrum({{0.0, 1.0, 1.0}})));
}

TEST(Validate, AcceptsTwoEqualAtoms) {
  EXPECT_NO_THROW(validate(JointSpectrum({{0.0, 1.0, 0.5}, {4.0, 1.0, 0.5}})));
}

TEST(Validate, RejectsZeroT) {
  EXPECT_THROW(validate(JointSpectrum({{0.0, 0.0, 1.0}})), InvalidModel);
}

TEST(Validate, RejectsNegativeT) {
  EXPECT_THROW(validate(JointSpectrum({{0.0, -1.0, 1.0}})), InvalidModel);
}

TEST(Validate, RejectsEmpty) {
  EXPECT_THROW(validate(JointSpectrum(std::vector<SpectrumAtom>{})), InvalidModel);
}

TEST(Validate, RejectsWeightsNotSummingToOne) {
  EXPECT_THROW(validate(JointSpectrum({{0.0, 1.0, 0.5}, {4.0, 1.0, 0.4}})),
               InvalidModel);
  EXPECT_THROW(validate(JointSpectrum({{0.0, 1.0, 1.0 + 1e-9}})), InvalidModel);
}

TEST(Validate, ToleratesTinyWeightDrift) {
  EXPECT_NO_THROW(validate(JointSpectrum({{0.0, 1.0, 1.0 + 5e-13}})));
}

TEST(Validate, RejectsDuplicates) {
  EXPECT_THROW(validate(JointSpectrum({{1.0, 1.0, 0.5}, {1.0, 1.0, 0.5}})),
               InvalidModel);
}

TEST(Validate, RejectsNegativeUAndBadWeights) {
  EXPECT_THROW(validate(JointSpectrum({{-1.0, 1.0, 1.0}})), InvalidModel);
  EXPECT_THROW(validate(JointSpectrum({{0.0, 1.0, 1.5}, {1.0, 1.0, -0.5}})),
               InvalidModel);
  EXPECT_THROW(
      validate(JointSpectrum({{std::numeric_limits<double>::quiet_NaN(), 1.0, 1.0}})),
      InvalidModel);
}

TEST(Moments, Examples) {
  EXPECT_DOUBLE_EQ(moments(JointSpectrum({{0.0, 1.0, 1.0}}), 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(moments(JointSpectrum({{0.0, 1.0, 0.5}, {4.0, 1.0, 0.5}}), 1, 0),
                   2.0);
  EXPECT_DOUBLE_EQ(moments(JointSpectrum({{1.0, 2.0, 1.0}}), 0, -1), 0.5);
}

TEST(Moments, ZerothMomentIsOne) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto h = validate(random_spectrum(rng));
    EXPECT_NEAR(moments(h, 0, 0), 1.0, 1e-12);
  }
}

TEST(MaterializePairs, SingleAtomReplicated) {
  const auto pairs = materialize_pairs(JointSpectrum({{0.0, 1.0, 1.0}}), 3);
  EXPECT_EQ(pairs, (std::vector<EigenPair>(3, EigenPair{0.0, 1.0})));
}

TEST(MaterializePairs, ExactHalves) {
  const auto pairs =
      materialize_pairs(JointSpectrum({{0.0, 1.0, 0.5}, {4.0, 1.0, 0.5}}), 4);
  EXPECT_EQ(pairs, (std::vector<EigenPair>{{0, 1}, {0, 1}, {4, 1}, {4, 1}}));
}

TEST(MaterializePairs, ThirtySeventyMatchesOracle) {
  const JointSpectrum h({{0.0, 1.0, 0.3}, {4.0, 1.0, 0.7}});
  const auto expected = oracle::brute_apportion({0.3, 0.7}, 10);
  ASSERT_EQ(expected, (std::vector<int>{3, 7}));
  const auto pairs = materialize_pairs(h, 10);
  EXPECT_EQ(std::count(pairs.begin(), pairs.end(), EigenPair{0, 1}), expected[0]);
  EXPECT_EQ(std::count(pairs.begin(), pairs.end(), EigenPair{4, 1}), expected[1]);
}

TEST(MaterializePairs, AgreesWithExhaustiveApportionment) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 60; ++rep) {
    const auto h = validate(random_spectrum(rng, 4));
    std::vector<double> w(h.w().data(), h.w().data() + h.size());
    for (int p : {1, 2, 3, 7, 13}) {
      const auto expected = oracle::brute_apportion(w, p);
      const auto pairs = materialize_pairs(h, p);
      ASSERT_EQ(static_cast<int>(pairs.size()), p);
      for (std::size_t k = 0; k < h.atoms().size(); ++k) {
        const EigenPair e{h.atoms()[k].u, h.atoms()[k].t};
        EXPECT_EQ(std::count(pairs.begin(), pairs.end(), e), expected[k])
            << "rep " << rep << " p " << p << " atom " << k;
      }
    }
  }
}

TEST(MaterializePairs, RejectsNonPositiveP) {
  EXPECT_THROW(materialize_pairs(JointSpectrum({{0.0, 1.0, 1.0}}), 0), InvalidModel);
}

// The joint CDF of the materialized pairs is within K/p of H at every point
// in the Kolmogorov sense, which bounds the Levy distance.
TEST(MaterializePairs, LevyDistanceBound) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const auto h = validate(random_spectrum(rng));
    const auto &atoms = h.atoms();
    const double k = static_cast<double>(atoms.size());
    for (int p : {1, 5, 17, 100, 1001}) {
      const auto pairs = materialize_pairs(h, p);
      double worst = 0.0;
      for (const auto &cut : atoms) {
        double cdf_h = 0.0, cdf_p = 0.0;
        for (const auto &a : atoms) {
          if (a.u <= cut.u && a.t <= cut.t) cdf_h += a.weight;
        }
        for (const auto &q : pairs) {
          if (q.u <= cut.u && q.t <= cut.t) cdf_p += 1.0 / p;
        }
        worst = std::max(worst, std::abs(cdf_h - cdf_p));
      }
      EXPECT_LE(worst, k / p + 1e-12);
    }
  }
}

TEST(MakeModel, ChecksAspectRatio) {
  const JointSpectrum h({{0.0, 1.0, 1.0}});
  EXPECT_NO_THROW(make_model(h, 1.0));
  EXPECT_NO_THROW(make_model(h, 1e-6));
  EXPECT_THROW(make_model(h, 0.0), InvalidModel);
  EXPECT_THROW(make_model(h, 1.5), InvalidModel);
}

TEST(JointSpectrum, ScaledMultipliesBothCoordinates) {
  const JointSpectrum h({{1.0, 2.0, 0.5}, {3.0, 1.0, 0.5}});
  const auto s = h.scaled(2.5);
  EXPECT_DOUBLE_EQ(s.atoms()[0].u, 2.5);
  EXPECT_DOUBLE_EQ(s.atoms()[1].t, 2.5);
  EXPECT_DOUBLE_EQ(s.atoms()[1].weight, 0.5);
  EXPECT_FALSE(h.pure_noise());
  EXPECT_TRUE(JointSpectrum({{0.0, 2.0, 1.0}}).pure_noise());
}
