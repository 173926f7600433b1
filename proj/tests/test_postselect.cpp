#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpqkd/phase_source.hpp"
#include "fpqkd/postselect.hpp"
#include "fpqkd/rng.hpp"
#include "test_util.hpp"

using namespace fpqkd;
constexpr double kPi = std::numbers::pi;

TEST_CASE("compute_C matches the envelope definition") {
  const double c = compute_C(0.5);
  CHECK(c > 0.960);
  CHECK(c < 0.962);

  // The minimizing argument lies right of the pdf minimum at mu_max/2; the
  // ratio at mu = 0.25 is ~0.9915, above the optimum.
  CHECK(intensity_pdf(0.25, 0.5) * std::exp(-0.25) == doctest::Approx(0.99148).epsilon(1e-3));
  double grid_min = 1e9;
  double grid_arg = 0.0;
  const int n = 1'000'000;
  for (int i = 1; i < n; ++i) {
    const double mu = 0.5 * i / n;
    const double v = intensity_pdf(mu, 0.5) * std::exp(-mu);
    if (v < grid_min) {
      grid_min = v;
      grid_arg = mu;
    }
    // C is a valid envelope everywhere on the grid.
    CHECK(c <= v * (1.0 + 1e-9));
  }
  CHECK(grid_arg > 0.25);
  CHECK(grid_arg < 0.5);
  CHECK(c == doctest::Approx(grid_min).epsilon(1e-9));
}

TEST_CASE("accept reproduces the exponential reshape") {
  const ReshapeSpec spec = auto_reshape(0.5);
  SourceConfig cfg;
  const std::size_t n = 10'000'000;
  std::size_t keep_h = 0, keep_both = 0;
  std::vector<double> survivors;
  survivors.reserve(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    SampleStream stream(3, i);
    const PulseSample s = make_sample(phases_at(3, i), cfg);
    const bool kh = accept(s.mu_h, spec, stream.uniform(lane::accept_h));
    const bool kv = accept(s.mu_v, spec, stream.uniform(lane::accept_v));
    if (kh) {
      ++keep_h;
      survivors.push_back(s.mu_h);
    }
    if (kh && kv) ++keep_both;
  }
  // Per-component keep probability integrates to C*(e^{mu_max}-1).
  const double expected = spec.target_scale_c * (std::exp(0.5) - 1.0);
  const double frac_h = static_cast<double>(keep_h) / n;
  CHECK(std::abs(frac_h - expected) < 5.0 * std::sqrt(expected * (1 - expected) / n));
  CHECK(frac_h == doctest::Approx(0.6234).epsilon(0.0017));  // ~0.624

  const double frac_both = static_cast<double>(keep_both) / n;
  CHECK(frac_both == doctest::Approx(0.3886).epsilon(0.0052));  // "about 38.8%"

  // Survivor histogram against the normalized exponential pdf, 100 bins.
  const int bins = 100;
  std::vector<double> counts(bins, 0.0);
  for (double mu : survivors) {
    int b = static_cast<int>(mu / 0.5 * bins);
    if (b >= bins) b = bins - 1;
    counts[b] += 1.0;
  }
  const double norm = std::exp(0.5) - 1.0;
  double sup = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = 0.5 * b / bins, hi = 0.5 * (b + 1) / bins;
    const double expect = (std::exp(hi) - std::exp(lo)) / norm;
    const double emp = counts[b] / survivors.size();
    sup = std::max(sup, std::abs(emp - expect) / expect);
  }
  CHECK(sup < 0.02);
}

TEST_CASE("accept rejects exact endpoints") {
  const ReshapeSpec spec = auto_reshape(0.5);
  CHECK_FALSE(accept(0.0, spec, 0.0));
  CHECK_FALSE(accept(0.5, spec, 0.0));
  CHECK_FALSE(accept(-0.1, spec, 0.0));
}

TEST_CASE("acceptance-rejection keeps the target law (KS)") {
  const ReshapeSpec spec = auto_reshape(0.5);
  SourceConfig cfg;
  std::vector<double> survivors;
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    SampleStream stream(17, i);
    const PulseSample s = make_sample(phases_at(17, i), cfg);
    if (accept(s.mu_h, spec, stream.uniform(lane::accept_h)))
      survivors.push_back(s.mu_h);
  }
  const double m = static_cast<double>(survivors.size());
  const double d = test::ks_statistic(std::move(survivors), [](double mu) {
    return (std::exp(mu) - 1.0) / (std::exp(0.5) - 1.0);
  });
  CHECK(d < test::ks_critical(0.001, m));
}

TEST_CASE("azimuth recovers trivial states and round trips") {
  CHECK(azimuth({0.25, 0.25, 0.5, 0.0}) == doctest::Approx(0.0));
  CHECK(azimuth({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(kPi / 2.0));
  CHECK_THROWS_AS(azimuth({0.0, 0.25, 0.1, 0.15}), std::domain_error);
  // Corrupt data: argument far beyond [-1, 1].
  CHECK_THROWS_AS(azimuth({0.01, 0.01, 0.5, 0.0}), std::domain_error);

  SourceConfig cfg;
  std::size_t tested = 0;
  for (std::size_t i = 0; tested < 100'000; ++i) {
    PulseSample s = make_sample(phases_at(23, i), cfg);
    if (s.phi_hv <= 0.0 || s.phi_hv >= kPi) continue;
    if (s.mu_h <= 0.0 || s.mu_v <= 0.0) continue;
    ++tested;
    const double rec = azimuth(local_readout(s));
    CHECK(std::abs(rec - s.phi_hv) < 1e-9);
  }
}

TEST_CASE("standard_regions geometry") {
  const auto regions = standard_regions({});
  REQUIRE(regions.size() == 2 + 6 + 3);

  // X radii scale as t * r_max.
  const Region& x1 = regions[8];
  const Region& x2 = regions[9];
  const Region& x3 = regions[10];
  CHECK(x1.label == "X1");
  CHECK(x2.radius_max == doctest::Approx(0.5 * x1.radius_max));
  CHECK(x3.radius_max == doctest::Approx(0.1 * x1.radius_max));

  // Inside Z_H, outside every X sector.
  PulseSample s;
  s.mu_h = 0.3;
  s.mu_v = 0.3 * std::tan(0.01);
  s.phi_hv = 0.0;
  auto sift = classify(s, regions);
  CHECK(sift.state == StateLabel::h);
  for (auto idx : sift.region_indices) CHECK(regions[idx].basis == Basis::z);

  // Diagonal point at small radius sits in all three concentric X sectors.
  s.mu_h = s.mu_v = 0.05 * 0.5 / std::sqrt(2.0);
  s.phi_hv = 0.05;
  sift = classify(s, regions);
  CHECK(sift.state == StateLabel::d);
  int x_hits = 0;
  for (auto idx : sift.region_indices)
    if (regions[idx].basis == Basis::x) ++x_hits;
  CHECK(x_hits == 3);

  // (0.4, 1e-4) is a Z_H / H state.
  s.mu_h = 0.4;
  s.mu_v = 1e-4;
  s.phi_hv = 1.0;
  sift = classify(s, regions);
  CHECK(sift.state == StateLabel::h);

  // (0.2, 0.2, phi=pi) has radius ~0.283: inside X1 only, as A.
  s.mu_h = s.mu_v = 0.2;
  s.phi_hv = kPi;
  sift = classify(s, regions);
  CHECK(sift.state == StateLabel::a);
  x_hits = 0;
  for (auto idx : sift.region_indices)
    if (regions[idx].basis == Basis::x) ++x_hits;
  CHECK(x_hits == 1);

  // Azimuth window miss.
  s.mu_h = s.mu_v = 0.25;
  s.phi_hv = kPi / 2.0;
  sift = classify(s, regions);
  CHECK(sift.state == StateLabel::none);

  CHECK_THROWS_AS(standard_regions({0.8, 0.2, 0.2, 0.5, {1.0, 0.5, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("X sector membership nests monotonically") {
  const auto regions = standard_regions({});
  SourceConfig cfg;
  for (std::size_t i = 0; i < 200'000; ++i) {
    const PulseSample s = make_sample(phases_at(29, i), cfg);
    bool in3 = regions[10].contains(s.mu_h, s.mu_v, s.phi_hv);
    bool in2 = regions[9].contains(s.mu_h, s.mu_v, s.phi_hv);
    bool in1 = regions[8].contains(s.mu_h, s.mu_v, s.phi_hv);
    if (in3) CHECK(in2);
    if (in2) CHECK(in1);
    // H<->V swap symmetry between the Z wedges.
    StateLabel st;
    const bool zh = regions[0].contains(s.mu_h, s.mu_v, s.phi_hv, &st);
    const bool zv_swapped = regions[1].contains(s.mu_v, s.mu_h, s.phi_hv, &st);
    CHECK(zh == zv_swapped);
  }
}

TEST_CASE("region_mass: box, symmetry, additivity") {
  Region box;
  box.label = "box";
  box.polar_min = 0.0;
  box.polar_max = kPi / 2.0;
  CHECK(region_mass(box, 0.5) == doctest::Approx(1.0).epsilon(1e-8));

  const auto regions = standard_regions({});
  const double mh = region_mass(regions[0], 0.5);
  const double mv = region_mass(regions[1], 0.5);
  CHECK(std::abs(mh - mv) < 1e-10);

  // Additivity: split Z_H at polar angle delta_z/2.
  Region lower = regions[0], upper = regions[0];
  lower.polar_max = 0.01;
  upper.polar_min = 0.01;
  CHECK(region_mass(lower, 0.5) + region_mass(upper, 0.5) ==
        doctest::Approx(mh).epsilon(1e-8));
}

TEST_CASE("X1 D-window mass agrees with Monte Carlo") {
  const auto regions = standard_regions({});
  Region x1d = regions[8];
  x1d.azimuth_windows.pop_back();  // keep the two D windows only
  const double mass = region_mass(x1d, 0.5);

  const ReshapeSpec spec = auto_reshape(0.5);
  SourceConfig cfg;
  const std::size_t n = 100'000'000;
  std::size_t kept = 0, inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    SampleStream stream(31, i);
    const PulseSample s = make_sample(phases_at(31, i), cfg);
    if (!accept(s.mu_h, spec, stream.uniform(lane::accept_h))) continue;
    if (!accept(s.mu_v, spec, stream.uniform(lane::accept_v))) continue;
    ++kept;
    if (x1d.contains(s.mu_h, s.mu_v, s.phi_hv)) ++inside;
  }
  const double frac = static_cast<double>(inside) / kept;
  const double sigma = std::sqrt(mass * (1.0 - mass) / kept);
  CHECK(std::abs(frac - mass) < 4.0 * sigma);
}
