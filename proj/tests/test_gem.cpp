#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "desk.hpp"
#include "softsweep/families.hpp"
#include "softsweep/gem.hpp"
#include "support/stats.hpp"

using namespace softsweep;

TEST_CASE("small theta puts almost all mass on the first stick") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(gem_sample(1e-6, rng).weights.front() > 0.99);
}

TEST_CASE("weights are positive and partial sums increase") {
  Rng rng(2);
  for (double theta : {0.3, 1.0, 5.0}) {
    for (int i = 0; i < 50; ++i) {
      const GEMSample g = gem_sample(theta, rng);
      double sum = 0.0;
      for (double w : g.weights) {
        REQUIRE(w > 0.0);
        sum += w;
      }
      CHECK(std::abs(sum + g.residual - 1.0) <= 1e-12);
      CHECK(g.residual < 1e-12);
    }
  }
  CHECK_THROWS(gem_sample(0.0, rng));
  CHECK_THROWS(gem_sample(-1.0, rng));
}

TEST_CASE("first stick is Beta(1, theta)") {
  for (double theta : {0.5, 1.0, 2.0}) {
    Rng rng(replicate_seed(100, static_cast<std::uint64_t>(theta * 10)));
    std::vector<double> first, identity;
    for (int i = 0; i < 10000; ++i) {
      const GEMSample g = gem_sample(theta, rng);
      first.push_back(g.weights.front());
      double s = 0.0;
      for (double w : g.weights) s += w * w;
      identity.push_back(s);
    }
    const double p = testing::ks_test(first, [theta](double x) { return 1.0 - std::pow(1.0 - x, theta); }).p_value;
    CHECK(p > 0.001);
    const auto m = testing::mean_se(first);
    CHECK(std::abs(m.mean - 1.0 / (1.0 + theta)) < 3.5 * m.se);
    const auto id = testing::mean_se(identity);
    CHECK(std::abs(id.mean - gem_identity_prob(theta).gem) < 3.5 * id.se);
  }
}

TEST_CASE("identity candidates") {
  CHECK(gem_identity_prob(0.0).gem == 1.0);
  CHECK(gem_identity_prob(0.0).corollary == 1.0);
  CHECK(gem_identity_prob(1.0).gem == 0.5);
  CHECK(gem_identity_prob(1.0).corollary == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(gem_identity_prob(-0.1));
}

TEST_CASE("predicted identity per scaling") {
  const EcoParams p = testing::desk();
  CHECK(predicted_identity(p, Regime1{1.0, 1.0, {}, {}}).gem == 1.0);
  const auto two = predicted_identity(p, Regime2{0.5, 0.5});
  CHECK(two.gem == doctest::Approx(1.0 / 1.2));
  CHECK(two.corollary == doctest::Approx(1.0 / 1.4));
  CHECK(predicted_identity(p, Regime3{0.5, 0.5, 0.5}).gem == 0.0);
  CHECK_THROWS(predicted_identity(p, Regime4{0.1, 0.1}));
}

TEST_CASE("spectrum summary") {
  const SpectrumSummary one = spectrum_summary({{1.0}});
  CHECK(one.count == 1);
  CHECK(one.mean_first == 1.0);
  CHECK(one.mean_largest == 1.0);
  CHECK(one.mean_identity == 1.0);
  CHECK(one.mean_families == 1.0);

  const SpectrumSummary two = spectrum_summary({{0.5, 0.5}, {1.0}, {}});
  CHECK(two.count == 2);
  CHECK(two.mean_first == 0.75);
  CHECK(two.mean_identity == 0.75);
  CHECK(two.mean_families == 1.5);
  CHECK(two.first_cdf(0.6) == 0.5);
  CHECK(two.first_cdf(1.0) == 1.0);
  CHECK(two.first_cdf(0.1) == 0.0);

  const SpectrumSummary ranked = spectrum_summary({{0.2, 0.7, 0.1}}, 2);
  REQUIRE(ranked.mean_ranked.size() == 2);
  CHECK(ranked.mean_ranked[0] == doctest::Approx(0.7));
  CHECK(ranked.mean_ranked[1] == doctest::Approx(0.2));
  CHECK(ranked.mean_aged[0] == doctest::Approx(0.2));
  CHECK(ranked.mean_largest == doctest::Approx(0.7));

  CHECK_THROWS_AS(spectrum_summary({}), std::invalid_argument);
  CHECK_THROWS_AS(spectrum_summary({{0.5, 0.3}}), std::invalid_argument);
}

TEST_CASE("mean first fraction at theta = 2") {
  Rng rng(12);
  std::vector<std::vector<double>> spectra;
  for (int i = 0; i < 5000; ++i) spectra.push_back(gem_sample(2.0, rng).weights);
  const SpectrumSummary s = spectrum_summary(spectra);
  CHECK(std::abs(s.mean_first - 1.0 / 3.0) < 3.5 * s.se_first);
  CHECK(s.mean_largest >= s.mean_first);
}
