#pragma once

#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qec/dynamics.hpp"

namespace qec {

/// Gaussian law for the (eps0, epsu) pair of one class, parameterized by mean
/// and 3-sigma per axis. Optional truncation bounds restrict the support.
struct DistributionSpec {
  double mean0 = 1.0;
  double threesigma0 = 0.05;
  double meanu = 1.0;
  double threesigmau = 0.05;
  std::optional<double> lower0, upper0;
  std::optional<double> loweru, upperu;

  double sigma0() const noexcept { return threesigma0 / 3.0; }
  double sigmau() const noexcept { return threesigmau / 3.0; }

  void validate() const {
    require(std::isfinite(mean0) && std::isfinite(meanu),
            "DistributionSpec: means must be finite");
    require(threesigma0 > 0.0 && threesigmau > 0.0,
            "DistributionSpec: 3-sigma values must be positive");
    auto check_axis = [](const std::optional<double>& lo, const std::optional<double>& hi,
                         const char* axis) {
      if (lo && hi) {
        require(*lo < *hi, std::string("DistributionSpec: truncation bounds on ") + axis +
                               " must satisfy lower < upper");
      }
    };
    check_axis(lower0, upper0, "eps0");
    check_axis(loweru, upperu, "epsu");
  }

  bool truncated() const noexcept {
    return lower0 || upper0 || loweru || upperu;
  }
};

/// Deterministic sample counts per axis for the training grid.
struct SampleGridSpec {
  int n0 = 5;
  int nu = 5;

  void validate() const {
    require(n0 >= 1 && nu >= 1, "SampleGridSpec: sample counts must be positive");
  }
};

/// Labeled members drawn from the per-class grids; members are stored grouped
/// by class, in grid order, which fixes the gradient reduction order.
struct TrainingSet {
  std::vector<MemberParams> members;
  std::vector<std::pair<std::string, int>> partition;  // (label, class size)

  int size() const noexcept { return static_cast<int>(members.size()); }

  int class_size(const std::string& label) const {
    for (const auto& [l, n] : partition) {
      if (l == label) return n;
    }
    throw ValidationError("TrainingSet: unknown class label '" + label + "'");
  }
};

/// Standard normal CDF.
inline double normal_cdf(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximation; absolute error below 1e-15 over (0, 1)).
inline double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile: p must lie strictly in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-9) * r +
              1.84631831751005468180e-6) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return (q < 0.0) ? -x : x;
}

/// Inverse CDF of the normal law with mean mu and deviation sigma restricted
/// to [lower, upper]; infinite bounds leave the corresponding side open.
inline double truncated_normal_quantile(double p, double mu, double sigma, double lower,
                                        double upper) {
  require(p > 0.0 && p < 1.0, "truncated_normal_quantile: p must lie strictly in (0, 1)");
  require(sigma > 0.0, "truncated_normal_quantile: sigma must be positive");
  require(lower < upper, "truncated_normal_quantile: lower must be below upper");
  const double fa = normal_cdf((lower - mu) / sigma);
  const double fb = normal_cdf((upper - mu) / sigma);
  require(fb > fa, "truncated_normal_quantile: truncation interval has no mass");
  return mu + sigma * normal_quantile(fa + p * (fb - fa));
}

namespace detail {

// Uniform double strictly inside (0, 1) from 64 random bits.
inline double uniform_open(std::mt19937_64& rng) {
  return (double(rng() >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double sample_axis(std::mt19937_64& rng, double mu, double sigma,
                          const std::optional<double>& lower,
                          const std::optional<double>& upper) {
  const double p = uniform_open(rng);
  if (lower || upper) {
    return truncated_normal_quantile(p, mu, sigma, lower.value_or(-kInf),
                                     upper.value_or(kInf));
  }
  return mu + sigma * normal_quantile(p);
}

// Derives a decorrelated per-class stream seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic training samples: the equally spaced grid
/// eps^n = mu - 3sigma + (2n - 1) * 3sigma / N on each axis, n = 1..N,
/// combined as a Cartesian product (eps0 outer, epsu inner).
inline std::vector<MemberParams> grid_samples(const DistributionSpec& dist,
                                              const SampleGridSpec& grid,
                                              const std::string& label) {
  dist.validate();
  grid.validate();
  auto axis_points = [](double mu, double threesigma, int n) {
    std::vector<double> pts;
    pts.reserve(size_t(n));
    for (int i = 1; i <= n; ++i) {
      pts.push_back(mu - threesigma + (2.0 * i - 1.0) * threesigma / n);
    }
    return pts;
  };
  const std::vector<double> e0 = axis_points(dist.mean0, dist.threesigma0, grid.n0);
  const std::vector<double> eu = axis_points(dist.meanu, dist.threesigmau, grid.nu);
  std::vector<MemberParams> members;
  members.reserve(e0.size() * eu.size());
  for (double v0 : e0) {
    for (double vu : eu) {
      members.push_back(MemberParams{v0, vu, label});
    }
  }
  return members;
}

/// Independent (eps0, epsu) draws from the class law, reproducible for a
/// fixed seed; honors truncation bounds when present.
inline std::vector<MemberParams> draw_test_samples(const DistributionSpec& dist, int count,
                                                   std::uint64_t seed,
                                                   const std::string& label = {}) {
  dist.validate();
  require(count >= 1, "draw_test_samples: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<MemberParams> samples;
  samples.reserve(size_t(count));
  for (int i = 0; i < count; ++i) {
    const double e0 =
        detail::sample_axis(rng, dist.mean0, dist.sigma0(), dist.lower0, dist.upper0);
    const double eu =
        detail::sample_axis(rng, dist.meanu, dist.sigmau(), dist.loweru, dist.upperu);
    samples.push_back(MemberParams{e0, eu, label});
  }
  return samples;
}

/// One class of a classification experiment: its parameter law, training
/// grid, and label.
struct ClassSamplingSpec {
  DistributionSpec dist;
  SampleGridSpec grid;
  std::string label;
};

/// Concatenates per-class grids into a labeled training set.
inline TrainingSet build_training_set(const std::vector<ClassSamplingSpec>& class_specs) {
  require(class_specs.size() >= 2, "build_training_set: at least two classes required");
  TrainingSet set;
  for (const auto& spec : class_specs) {
    require(!spec.label.empty(), "build_training_set: class labels must be nonempty");
    for (const auto& [label, n] : set.partition) {
      require(label != spec.label,
              "build_training_set: duplicate class label '" + spec.label + "'");
    }
    std::vector<MemberParams> members = grid_samples(spec.dist, spec.grid, spec.label);
    set.partition.emplace_back(spec.label, static_cast<int>(members.size()));
    set.members.insert(set.members.end(), members.begin(), members.end());
  }
  return set;
}

/// Cuts two overlapping class laws at the midpoints of their means: the class
/// with the smaller mean keeps the lower half-line, the other the upper, per
/// axis. Produces the non-overlapping counterpart of a binary experiment.
inline std::pair<DistributionSpec, DistributionSpec> apply_midpoint_truncation(
    DistributionSpec a, DistributionSpec b) {
  a.validate();
  b.validate();
  require(a.mean0 != b.mean0 && a.meanu != b.meanu,
          "apply_midpoint_truncation: class means must differ on both axes");
  const double mid0 = 0.5 * (a.mean0 + b.mean0);
  const double midu = 0.5 * (a.meanu + b.meanu);
  if (a.mean0 < b.mean0) {
    a.upper0 = mid0;
    b.lower0 = mid0;
  } else {
    a.lower0 = mid0;
    b.upper0 = mid0;
  }
  if (a.meanu < b.meanu) {
    a.upperu = midu;
    b.loweru = midu;
  } else {
    a.loweru = midu;
    b.upperu = midu;
  }
  return {std::move(a), std::move(b)};
}

}  // namespace qec
