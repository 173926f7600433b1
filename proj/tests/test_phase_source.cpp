#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fpqkd/phase_source.hpp"
#include "fpqkd/quadrature.hpp"
#include "test_util.hpp"

using namespace fpqkd;
constexpr double kPi = std::numbers::pi;

TEST_CASE("sample_phases is deterministic in the seed") {
  const auto a = sample_phases(42, 2);
  const auto b = sample_phases(42, 2);
  const auto c = sample_phases(43, 2);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("phases are uniform on [0, 2pi)") {
  const std::size_t n = 1'000'000;
  const auto quads = sample_phases(7, n);
  // Per-phase empirical mean within 5 sigma of pi.
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& q : quads) sum += q[k];
    const double mean = sum / n;
    const double se = (2.0 * kPi) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean - kPi) < 5.0 * se);
  }
  // KS against the uniform law at the 0.1% level.
  std::vector<double> flat;
  flat.reserve(n);
  for (const auto& q : quads) flat.push_back(q[0]);
  const double d = test::ks_statistic(
      std::move(flat), [](double x) { return x / (2.0 * kPi); });
  CHECK(d < test::ks_critical(0.001, n));
}

TEST_CASE("interfere endpoints") {
  CHECK(interfere(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(interfere(kPi, 0.0) == doctest::Approx(0.0));
  CHECK(interfere(kPi / 2.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("make_sample evaluates the interference formulas") {
  SourceConfig cfg;
  cfg.mu_max_per_pol = 0.5;
  const PulseSample s = make_sample({0.0, 0.0, kPi, 0.0}, cfg);
  CHECK(s.mu_h == doctest::Approx(0.5));
  // phi_V = pi gives destructive interference on the V arm.
  CHECK(s.mu_v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.phi_hv == doctest::Approx(kPi));

  const PulseSample q = make_sample({kPi / 2.0, 0.0, 0.0, 0.0}, cfg);
  CHECK(q.mu_h == doctest::Approx(0.25));
  CHECK(q.mu_v == doctest::Approx(0.5));
  CHECK(q.phi_hv == doctest::Approx(2.0 * kPi - kPi / 2.0));
}

TEST_CASE("intensity_pdf closed form and domain") {
  CHECK(intensity_pdf(0.25, 0.5) == doctest::Approx(4.0 / kPi).epsilon(1e-12));
  CHECK(intensity_pdf(0.1, 0.5) == doctest::Approx(1.0 / (kPi * 0.2)).epsilon(1e-12));
  CHECK_THROWS_AS(intensity_pdf(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(intensity_pdf(0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(intensity_pdf(-0.1, 0.5), std::domain_error);
}

TEST_CASE("intensity_pdf integrates to one under the sin^2 substitution") {
  // mu = mu_max sin^2(t) removes both endpoint singularities; the integrand
  // becomes the constant 2/pi.
  const double mu_max = 0.5;
  std::vector<double> x, w;
  gauss_legendre_on(64, 0.0, kPi / 2.0, x, w);
  double integral = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mu = mu_max * std::sin(x[i]) * std::sin(x[i]);
    const double jac = 2.0 * mu_max * std::sin(x[i]) * std::cos(x[i]);
    integral += w[i] * intensity_pdf(mu, mu_max) * jac;
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mu_h follows the arcsine law") {
  SourceConfig cfg;
  const std::size_t n = 1'000'000;
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i)
    mu[i] = make_sample(phases_at(11, i), cfg).mu_h;
  const double d = test::ks_statistic(
      std::move(mu), [&](double m) { return intensity_cdf(m, cfg.mu_max_per_pol); });
  CHECK(d < test::ks_critical(0.001, n));
}

TEST_CASE("phi_hv is uniform and mu_h, mu_v uncorrelated") {
  SourceConfig cfg;
  const std::size_t n = 1'000'000;
  std::vector<double> phi(n);
  double sh = 0, sv = 0, shh = 0, svv = 0, shv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const PulseSample s = make_sample(phases_at(13, i), cfg);
    phi[i] = s.phi_hv;
    sh += s.mu_h;
    sv += s.mu_v;
    shh += s.mu_h * s.mu_h;
    svv += s.mu_v * s.mu_v;
    shv += s.mu_h * s.mu_v;
  }
  const double d = test::ks_statistic(
      std::move(phi), [](double x) { return x / (2.0 * kPi); });
  CHECK(d < test::ks_critical(0.001, n));

  const double mh = sh / n, mv = sv / n;
  const double var_h = shh / n - mh * mh;
  const double var_v = svv / n - mv * mv;
  const double corr = (shv / n - mh * mv) / std::sqrt(var_h * var_v);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generate_train window structure") {
  SourceConfig cfg;
  cfg.train_mode = true;
  const auto train = generate_train(16, cfg);
  CHECK(train.size() == 13);  // sliding windows 0..12
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train[i].valid) valid.push_back(i);
  CHECK(valid == std::vector<std::size_t>{0, 4, 8, 12});
  // Valid windows share no raw pulse index by construction: starting indices
  // are 4 apart and each window spans 4 pulses.
  CHECK_THROWS_AS(generate_train(7, cfg), std::invalid_argument);
  SourceConfig iid;
  CHECK_THROWS_AS(generate_train(16, iid), std::invalid_argument);
}

TEST_CASE("train-mode marginals match i.i.d. quadruples") {
  SourceConfig train_cfg;
  train_cfg.train_mode = true;
  train_cfg.rng_seed = 5;
  const std::size_t n_pulses = 400'000;
  const auto train = generate_train(n_pulses, train_cfg);
  std::vector<double> mu_train, phi_train;
  for (const auto& s : train) {
    if (!s.valid) continue;
    mu_train.push_back(s.mu_h);
    phi_train.push_back(s.phi_hv);
  }
  SourceConfig iid;
  iid.rng_seed = 6;
  std::vector<double> mu_iid, phi_iid;
  for (std::size_t i = 0; i < mu_train.size(); ++i) {
    const PulseSample s = make_sample(phases_at(iid.rng_seed, i), iid);
    mu_iid.push_back(s.mu_h);
    phi_iid.push_back(s.phi_hv);
  }
  const double n = static_cast<double>(mu_train.size());
  const double crit = test::ks_critical_two_sample(0.001, n, n);
  CHECK(test::ks_two_sample(mu_train, mu_iid) < crit);
  CHECK(test::ks_two_sample(phi_train, phi_iid) < crit);
}

TEST_CASE("local_readout basics and energy conservation") {
  PulseSample s;
  s.mu_h = 0.25;
  s.mu_v = 0.25;
  s.phi_hv = 0.0;
  LocalReadout r = local_readout(s);
  CHECK(r.mu_d == doctest::Approx(0.5));
  CHECK(r.mu_a == doctest::Approx(0.0));
  s.phi_hv = kPi;
  r = local_readout(s);
  CHECK(r.mu_d == doctest::Approx(0.0));
  CHECK(r.mu_a == doctest::Approx(0.5));

  SourceConfig cfg;
  for (std::size_t i = 0; i < 100'000; ++i) {
    const PulseSample smp = make_sample(phases_at(21, i), cfg);
    const LocalReadout lr = local_readout(smp);
    CHECK(std::abs(lr.mu_d + lr.mu_a - (lr.mu_h + lr.mu_v)) < 1e-12);
    CHECK(lr.mu_d >= -1e-15);
    CHECK(lr.mu_a >= -1e-15);
  }
}
