#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "qec/ensemble.hpp"

using namespace qec;

namespace {

// Independent oracle: invert the truncated-normal CDF by bisection.
double bisect_truncated_quantile(double p, double mu, double sigma, double lower,
                                 double upper) {
  const double fa = normal_cdf((lower - mu) / sigma);
  const double fb = normal_cdf((upper - mu) / sigma);
  auto cdf = [&](double x) {
    return (normal_cdf((x - mu) / sigma) - fa) / (fb - fa);
  };
  double lo = std::isinf(lower) ? mu - 12 * sigma : lower;
  double hi = std::isinf(upper) ? mu + 12 * sigma : upper;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("grid_samples reproduces the equally spaced axis points") {
  DistributionSpec dist;
  dist.mean0 = 0.85;
  dist.threesigma0 = 0.05;
  dist.meanu = 0.85;
  dist.threesigmau = 0.05;
  auto members = grid_samples(dist, SampleGridSpec{5, 5}, "A");
  REQUIRE(members.size() == 25);

  std::vector<double> axis;
  for (int i = 0; i < 5; ++i) axis.push_back(members[size_t(i) * 5].eps0);
  const std::vector<double> expected{0.81, 0.83, 0.85, 0.87, 0.89};
  for (int i = 0; i < 5; ++i) CHECK(axis[size_t(i)] == Catch::Approx(expected[size_t(i)]).margin(1e-12));
  for (const auto& m : members) CHECK(m.label == "A");
}

TEST_CASE("a one-sample grid collapses to the mean") {
  DistributionSpec dist;
  dist.mean0 = 1.7;
  dist.threesigma0 = 0.3;
  dist.meanu = -0.4;
  dist.threesigmau = 0.2;
  auto members = grid_samples(dist, SampleGridSpec{1, 1}, "x");
  REQUIRE(members.size() == 1);
  CHECK(members[0].eps0 == Catch::Approx(1.7).margin(1e-15));
  CHECK(members[0].epsu == Catch::Approx(-0.4).margin(1e-15));
}

TEST_CASE("grid samples are symmetric about the mean and strictly inside the support") {
  DistributionSpec dist;
  dist.mean0 = 1.15;
  dist.threesigma0 = 0.15;
  dist.meanu = 0.85;
  dist.threesigmau = 0.05;
  for (int n : {1, 3, 5, 7}) {
    auto members = grid_samples(dist, SampleGridSpec{n, n}, "B");
    double sum0 = 0, sumu = 0;
    for (const auto& m : members) {
      sum0 += m.eps0;
      sumu += m.epsu;
      CHECK(m.eps0 > dist.mean0 - dist.threesigma0);
      CHECK(m.eps0 < dist.mean0 + dist.threesigma0);
      CHECK(m.epsu > dist.meanu - dist.threesigmau);
      CHECK(m.epsu < dist.meanu + dist.threesigmau);
    }
    CHECK(sum0 / double(members.size()) == Catch::Approx(dist.mean0).margin(1e-12));
    CHECK(sumu / double(members.size()) == Catch::Approx(dist.meanu).margin(1e-12));
  }
  CHECK_THROWS_AS(grid_samples(dist, SampleGridSpec{0, 5}, "B"), ValidationError);
}

TEST_CASE("normal_quantile matches reference values and inverts the CDF") {
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(normal_quantile(0.75) == Catch::Approx(0.6744897501960817).margin(1e-12));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.9599639845400542).margin(1e-12));
  CHECK(normal_quantile(0.995) == Catch::Approx(2.5758293035489007).margin(1e-12));
  CHECK(normal_quantile(1e-10) == Catch::Approx(-6.3613409024040562).margin(1e-9));
  for (double p = 0.0005; p < 1.0; p += 0.0005) {
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), ValidationError);
  CHECK_THROWS_AS(normal_quantile(1.0), ValidationError);
}

TEST_CASE("truncated_normal_quantile agrees with a bisection oracle") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(truncated_normal_quantile(0.5, 0, 1, -inf, inf) == Catch::Approx(0.0).margin(1e-12));
  // half-normal median
  CHECK(truncated_normal_quantile(0.5, 0, 1, 0, inf) ==
        Catch::Approx(0.6744897501960817).margin(1e-10));
  for (double p : {0.03, 0.2, 0.5, 0.77, 0.99}) {
    const double got = truncated_normal_quantile(p, 0.85, 0.05 / 3, -inf, 1.0);
    const double expected = bisect_truncated_quantile(p, 0.85, 0.05 / 3, -inf, 1.0);
    CHECK(got == Catch::Approx(expected).margin(1e-9));
  }
  // monotone in p
  double prev = -inf;
  for (double p = 0.02; p < 1.0; p += 0.02) {
    const double v = truncated_normal_quantile(p, 0.3, 0.7, -0.1, 2.0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(truncated_normal_quantile(0.0, 0, 1, -1, 1), ValidationError);
  CHECK_THROWS_AS(truncated_normal_quantile(1.5, 0, 1, -1, 1), ValidationError);
  CHECK_THROWS_AS(truncated_normal_quantile(0.5, 0, 1, 2, 1), ValidationError);
}

TEST_CASE("seeded draws are reproducible") {
  DistributionSpec dist;
  dist.mean0 = 0.85;
  dist.threesigma0 = 0.05;
  dist.meanu = 1.15;
  dist.threesigmau = 0.05;
  auto first = draw_test_samples(dist, 200, 99, "A");
  auto second = draw_test_samples(dist, 200, 99, "A");
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].eps0 == second[i].eps0);
    CHECK(first[i].epsu == second[i].epsu);
  }
  auto other = draw_test_samples(dist, 200, 100, "A");
  bool any_different = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].eps0 != other[i].eps0) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("sample mean obeys the law of large numbers bound") {
  DistributionSpec dist;
  dist.mean0 = 0.85;
  dist.threesigma0 = 0.05;
  dist.meanu = 0.85;
  dist.threesigmau = 0.05;
  const int count = 100000;
  auto samples = draw_test_samples(dist, count, 2024, "A");
  double mean = 0;
  for (const auto& s : samples) mean += s.eps0;
  mean /= count;
  const double sigma = dist.sigma0();
  CHECK(std::abs(mean - 0.85) < 3.0 * sigma / std::sqrt(double(count)));
}

TEST_CASE("truncated draws never violate their bounds") {
  DistributionSpec dist;
  dist.mean0 = 0.85;
  dist.threesigma0 = 0.15;
  dist.meanu = 1.15;
  dist.threesigmau = 0.15;
  dist.upper0 = 1.0;
  dist.loweru = 1.0;
  auto samples = draw_test_samples(dist, 20000, 7, "A");
  for (const auto& s : samples) {
    REQUIRE(s.eps0 < 1.0);
    REQUIRE(s.epsu > 1.0);
  }
}

TEST_CASE("draws pass a Kolmogorov-Smirnov check against the target CDF") {
  DistributionSpec dist;
  dist.mean0 = 0.85;
  dist.threesigma0 = 0.05;
  dist.meanu = 1.0;
  dist.threesigmau = 0.3;
  dist.upperu = 1.1;  // one truncated axis, one free
  const int n = 10000;
  auto samples = draw_test_samples(dist, n, 31415, "A");

  auto ks_statistic = [n](std::vector<double> values, auto&& cdf) {
    std::sort(values.begin(), values.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = cdf(values[size_t(i)]);
      d = std::max(d, std::abs(f - double(i) / n));
      d = std::max(d, std::abs(f - double(i + 1) / n));
    }
    return d;
  };

  std::vector<double> eps0, epsu;
  for (const auto& s : samples) {
    eps0.push_back(s.eps0);
    epsu.push_back(s.epsu);
  }
  const double critical = 1.6276 / std::sqrt(double(n));  // alpha = 0.01
  const double d0 = ks_statistic(eps0, [&](double x) {
    return normal_cdf((x - dist.mean0) / dist.sigma0());
  });
  const double fb = normal_cdf((1.1 - dist.meanu) / dist.sigmau());
  const double du = ks_statistic(epsu, [&](double x) {
    return normal_cdf((x - dist.meanu) / dist.sigmau()) / fb;
  });
  CHECK(d0 < critical);
  CHECK(du < critical);
}

TEST_CASE("build_training_set concatenates labeled class grids") {
  DistributionSpec a;
  a.mean0 = a.meanu = 0.85;
  a.threesigma0 = a.threesigmau = 0.05;
  DistributionSpec b;
  b.mean0 = b.meanu = 1.15;
  b.threesigma0 = b.threesigmau = 0.05;

  auto set = build_training_set({{a, {5, 5}, "A"}, {b, {5, 5}, "B"}});
  CHECK(set.size() == 50);
  CHECK(set.class_size("A") == 25);
  CHECK(set.class_size("B") == 25);
  CHECK(set.members[0].label == "A");
  CHECK(set.members[49].label == "B");

  auto tiny = build_training_set({{a, {1, 1}, "A"}, {b, {1, 1}, "B"}});
  CHECK(tiny.size() == 2);
  CHECK(tiny.members[0].eps0 == Catch::Approx(0.85).margin(1e-15));
  CHECK(tiny.members[1].eps0 == Catch::Approx(1.15).margin(1e-15));

  DistributionSpec c;
  c.mean0 = c.meanu = 1.2;
  c.threesigma0 = c.threesigmau = 0.05;
  auto multi = build_training_set({{a, {3, 3}, "A"}, {b, {3, 3}, "B"}, {c, {3, 3}, "C"}});
  CHECK(multi.size() == 27);

  CHECK_THROWS_AS(build_training_set({{a, {5, 5}, "A"}, {b, {5, 5}, "A"}}), ValidationError);
  CHECK_THROWS_AS(build_training_set({{a, {5, 5}, "A"}}), ValidationError);
}

TEST_CASE("midpoint truncation splits two overlapping classes") {
  DistributionSpec a;
  a.mean0 = a.meanu = 0.85;
  a.threesigma0 = a.threesigmau = 0.05;
  DistributionSpec b;
  b.mean0 = b.meanu = 1.15;
  b.threesigma0 = b.threesigmau = 0.05;
  auto [ta, tb] = apply_midpoint_truncation(a, b);
  REQUIRE(ta.upper0.has_value());
  CHECK(*ta.upper0 == Catch::Approx(1.0));
  CHECK(*ta.upperu == Catch::Approx(1.0));
  CHECK_FALSE(ta.lower0.has_value());
  REQUIRE(tb.lower0.has_value());
  CHECK(*tb.lower0 == Catch::Approx(1.0));
  CHECK(*tb.loweru == Catch::Approx(1.0));
  CHECK_FALSE(tb.upper0.has_value());
}
