#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "enachi/cost_model.hpp"
#include "enachi/model_profile.hpp"

using namespace enachi;

TEST(Surrogate, ConstructorRejectsPoleOutsideUnitRange) {
  EXPECT_THROW(SurrogateCoefficients(2.0, 2.5, 0.9), std::invalid_argument);
  EXPECT_THROW(SurrogateCoefficients(0.0, 0.0, 0.9), std::invalid_argument);
  EXPECT_THROW(SurrogateCoefficients(5.0, 1.0, -0.1), std::invalid_argument);
  EXPECT_THROW(SurrogateCoefficients(1.0, 0.5, 0.9), std::invalid_argument);  // zero crossing > 1
}

TEST(Surrogate, ValuesAndClipping) {
  const SurrogateCoefficients k(40.0, 1.0, 0.8 + 1.0 / 39.0);
  EXPECT_NEAR(k.zero_crossing(), 0.055279503105590065, 1e-15);
  EXPECT_NEAR(surrogate_accuracy(k, 1.0), 0.8, 1e-15);
  EXPECT_NEAR(surrogate_accuracy(k, 0.5), 0.7730094466936572, 1e-15);
  EXPECT_NEAR(surrogate_accuracy(k, 0.2), 0.6827838827838828, 1e-15);
  EXPECT_EQ(surrogate_accuracy(k, 0.0), 0.0);
  EXPECT_EQ(surrogate_accuracy(k, k.zero_crossing()), 0.0);
  EXPECT_THROW((void)surrogate_accuracy(k, 1.01), std::invalid_argument);

  const SurrogateCoefficients big(10.0, 0.0, 1.5);
  EXPECT_EQ(surrogate_accuracy(big, 1.0), 1.0);
}

TEST(Surrogate, MonotoneAndConcaveAboveZeroCrossing) {
  const SurrogateCoefficients k(20.0, 0.5, 0.85);
  double prev = 0.0, prev_slope = 1e300;
  for (int i = 1; i <= 200; ++i) {
    const double b = k.zero_crossing() + (1.0 - k.zero_crossing()) * i / 200.0;
    const double a = surrogate_accuracy(k, b);
    EXPECT_GE(a, prev);
    const double slope = a - prev;
    if (i > 1) { EXPECT_LE(slope, prev_slope + 1e-15); }
    prev_slope = slope;
    prev = a;
  }
}

TEST(SurrogateFit, RecoversKnownCurve) {
  const SurrogateCoefficients truth(30.0, 0.5, 0.85);
  std::vector<std::pair<double, double>> samples;
  for (int i = 1; i <= 20; ++i) {
    const double b = 0.05 * i;
    samples.emplace_back(b, surrogate_accuracy(truth, b));
  }
  const SurrogateFit fit = fit_surrogate(samples);
  EXPECT_FALSE(fit.degenerate);
  EXPECT_LT(fit.rmse, 1e-3);
  for (const auto& [b, a] : samples) {
    EXPECT_NEAR(surrogate_accuracy(fit.coeffs, b), a, 3e-3);
  }
}

TEST(SurrogateFit, FlatDataIsDegenerate) {
  std::vector<std::pair<double, double>> samples = {{0.2, 0.7}, {0.5, 0.7}, {0.9, 0.7}};
  const SurrogateFit fit = fit_surrogate(samples);
  EXPECT_TRUE(fit.degenerate);
  // (1e6, 0, c): flat up to a 1 / (1e6 beta) dip
  EXPECT_NEAR(surrogate_accuracy(fit.coeffs, 0.5), 0.7 - 2e-6, 1e-12);
  EXPECT_NEAR(surrogate_accuracy(fit.coeffs, 1.0), 0.7, 1e-5);
}

TEST(SurrogateFit, NeedsThreeDistinctBetas) {
  std::vector<std::pair<double, double>> samples = {{0.2, 0.5}, {0.2, 0.6}, {0.8, 0.7}};
  EXPECT_THROW((void)fit_surrogate(samples), std::invalid_argument);
}

TEST(Importance, OrderByScoreThenIndex) {
  const std::vector<double> scores = {0.3, 0.9, 0.5};
  EXPECT_EQ(importance_order(scores), (std::vector<int>{1, 2, 0}));
  const std::vector<double> ties = {0.5, 0.7, 0.5, 0.7};
  EXPECT_EQ(importance_order(ties), (std::vector<int>{1, 3, 0, 2}));
}

TEST(Importance, GeometricScores) {
  const auto g = geometric_importance(4, 0.1);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_NEAR(g[1], 0.5623413251903491, 1e-15);
  EXPECT_NEAR(g[2], 0.31622776601683794, 1e-15);
  EXPECT_NEAR(g[3], 0.1778279410038923, 1e-15);
  EXPECT_THROW((void)geometric_importance(0, 0.1), std::invalid_argument);
  EXPECT_THROW((void)geometric_importance(3, 0.0), std::invalid_argument);
}

TEST(DefaultProfile, Geometry) {
  const DnnProfile p = default_profile();
  EXPECT_EQ(p.last_layer(), 5);
  EXPECT_EQ(p.split_points(), (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_DOUBLE_EQ(p.total_macs(), 5.5e8);
  // device-only needs 275 ms on a 2 GHz device
  EXPECT_NEAR(local_delay(local_workload(p, 5), 2e9), 0.275, 1e-15);
  EXPECT_DOUBLE_EQ(p.map_bits(0), 392.0);
  EXPECT_DOUBLE_EQ(p.total_feature_bits(0), 1204224.0);
  EXPECT_DOUBLE_EQ(local_workload(p, 0), 0.0);
  EXPECT_DOUBLE_EQ(edge_workload(p, 5), 0.0);
  EXPECT_DOUBLE_EQ(local_workload(p, 3) + edge_workload(p, 3), 5.5e8);
  EXPECT_TRUE(p.is_fully_local(5));
  EXPECT_DOUBLE_EQ(p.accuracy(5, 0.0), 0.8038);
  for (int s = 0; s <= 4; ++s) {
    EXPECT_NEAR(p.accuracy(s, 1.0), 0.8, 1e-12) << s;
    EXPECT_LT(p.accuracy(s, 1.0), p.full_model_accuracy());
    EXPECT_EQ(p.order(s).front(), 0);
  }
  EXPECT_THROW((void)p.surrogate(6), std::invalid_argument);
  EXPECT_THROW((void)local_workload(p, 9), std::invalid_argument);
}

TEST(DnnProfileCtor, Validation) {
  std::vector<LayerSpec> layers = {{0, 0.0, 2, 1, 1}, {1, 10.0, 1, 1, 1}};
  std::map<int, SurrogateCoefficients> sur = {{0, SurrogateCoefficients(10.0, 0.0, 0.9)}};
  std::map<int, std::vector<double>> imp = {{0, {1.0, 0.5}}};
  EXPECT_NO_THROW(DnnProfile(layers, {0, 1}, 8, sur, imp, 0.9));
  EXPECT_THROW(DnnProfile(layers, {1}, 8, sur, imp, 0.9), std::invalid_argument);
  EXPECT_THROW(DnnProfile(layers, {0, 1}, 8, {}, imp, 0.9), std::invalid_argument);
  std::map<int, std::vector<double>> short_imp = {{0, {1.0}}};
  EXPECT_THROW(DnnProfile(layers, {0, 1}, 8, sur, short_imp, 0.9), std::invalid_argument);
  EXPECT_THROW(DnnProfile(layers, {0, 1}, 8, sur, imp, 1.5), std::invalid_argument);
}
