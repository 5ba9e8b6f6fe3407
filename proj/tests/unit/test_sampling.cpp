#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "tlsfluct/errors.hpp"
#include "tlsfluct/random.hpp"
#include "tlsfluct/sampling.hpp"

using namespace tlsfluct;

namespace {

std::vector<double> draw(int n, std::uint64_t id, const std::function<double(double)>& q) {
  RandomStream s(2024, id);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = q(s.uniform());
  return out;
}

}  // namespace

TEST_CASE("adaptive quadrature integrates smooth and endpoint-steep functions") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return 1.0 / x; }, 0.1, 6.0, 1e-12) ==
        doctest::Approx(std::log(60.0)).epsilon(1e-10));
}

TEST_CASE("dipole law: normalization and quantiles against the closed-form CDF") {
  const auto law = dipole_law(0.1, 6.0);
  CHECK(law.normalization() == doctest::Approx(3.7875611896379791652).epsilon(1e-9));
  CHECK(sample_dipole(law, 0.5) == doctest::Approx(0.66645362546515665802).epsilon(1e-9));
  CHECK(sample_dipole(law, 0.25) == doctest::Approx(0.25786931486464164886).epsilon(1e-9));
  CHECK(sample_dipole(law, 0.90) == doctest::Approx(3.2649064588803694742).epsilon(1e-9));
  for (double p : {0.2, 0.5, 1.0, 2.5, 5.9}) {
    CHECK(law.cdf(p) == doctest::Approx(oracle::dipole_cdf(p, 0.1, 6.0)).epsilon(1e-9));
  }
  CHECK(sample_dipole(law, 0.0) == 0.1);
  CHECK(sample_dipole(law, 1.0) == 6.0);
}

TEST_CASE("GTM pair inversion") {
  const auto pair = sample_gtm_pair(0.3, 125e6, 1e9, 0.5, 0.0);
  CHECK(pair.asymmetry == doctest::Approx(586730230.00231).epsilon(1e-12));
  CHECK(pair.tunneling == doctest::Approx(125e6));
  CHECK(sample_gtm_pair(0.3, 125e6, 1e9, 0.5, 1.0).tunneling == doctest::Approx(1e9));
  // Closed form agrees with the numerically integrated marginal.
  const auto numeric = ProbabilityLaw::numeric([](double x) { return std::pow(x, 0.3); }, 0.0, 1e9);
  CHECK(bisect_quantile(numeric, 0.5) == doctest::Approx(pair.asymmetry).epsilon(1e-9));
}

TEST_CASE("radius law inversion") {
  CHECK(sample_radius(15.0, 60.0, 0.5) == doctest::Approx(43.732139211339753532).epsilon(1e-12));
  CHECK(sample_radius(15.0, 60.0, 0.0) == 15.0);
  CHECK(sample_radius(15.0, 60.0, 1.0) == doctest::Approx(60.0));
}

TEST_CASE("dwell law and log-uniform law") {
  CHECK(sample_dwell(2.0, 1.0 - std::exp(-1.0)) == doctest::Approx(0.5));
  const auto lu = log_uniform_law(1e6, 1e8);
  CHECK(inverse_cdf_sample(lu, 0.5) == doctest::Approx(1e7));
  // Bisection on a closed-form law agrees with its analytic quantile.
  for (double u : {0.01, 0.3, 0.77, 0.999}) {
    CHECK(bisect_quantile(lu, u) == doctest::Approx(lu.analytic_quantile(u)).epsilon(1e-10));
  }
}

TEST_CASE("quantiles outside [0, 1] are domain errors") {
  const auto law = uniform_law(0.0, 1.0);
  CHECK_THROWS_AS(inverse_cdf_sample(law, -0.1), DomainError);
  CHECK_THROWS_AS(inverse_cdf_sample(law, 1.5), DomainError);
  CHECK_THROWS_AS(sample_radius(15.0, 60.0, std::nan("")), DomainError);
  CHECK_THROWS_AS(dipole_law(6.0, 0.1), DomainError);
}

TEST_CASE("Kolmogorov-Smirnov at n = 1e5 for every sampled law") {
  const int n = 100000;
  const double mu = 0.3, emin = 125e6, emax = 1e9;

  const auto delta = draw(n, 1, [&](double u) { return sample_gtm_pair(mu, emin, emax, u, 0.5).asymmetry; });
  CHECK(oracle::ks_statistic(delta, [&](double x) { return std::pow(x / emax, 1.0 + mu); }) < 0.006);

  const auto d0 = draw(n, 2, [&](double u) { return sample_gtm_pair(mu, emin, emax, 0.5, u).tunneling; });
  CHECK(oracle::ks_statistic(d0, [&](double x) { return std::log(x / emin) / std::log(emax / emin); }) < 0.006);

  const auto stm = draw(n, 3, [&](double u) { return sample_stm_pair(emax, emin, emax, u, 0.5).asymmetry; });
  CHECK(oracle::ks_statistic(stm, [&](double x) { return x / emax; }) < 0.006);

  const auto law = dipole_law(0.1, 6.0);
  const auto p = draw(n, 4, [&](double u) { return sample_dipole(law, u); });
  CHECK(oracle::ks_statistic(p, [](double x) { return oracle::dipole_cdf(x, 0.1, 6.0); }) < 0.006);

  const auto r = draw(n, 5, [](double u) { return sample_radius(15.0, 60.0, u); });
  CHECK(oracle::ks_statistic(r, [](double x) { return (x * x - 225.0) / (3600.0 - 225.0); }) < 0.006);

  const auto t = draw(n, 6, [](double u) { return sample_dwell(3.0, u); });
  CHECK(oracle::ks_statistic(t, [](double x) { return 1.0 - std::exp(-3.0 * x); }) < 0.006);
}

TEST_CASE("Gaussian and Poisson moments") {
  RandomStream s(5, 0);
  const int n = 100000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gaussian(2.0, s);
    m1 += x;
    m2 += x * x;
  }
  CHECK(std::abs(m1 / n) < 4.0 * 2.0 / std::sqrt(n));
  CHECK(m2 / n == doctest::Approx(4.0).epsilon(0.02));

  for (double mean : {0.7, 12.0, 43000.0}) {
    RandomStream ps(6, static_cast<std::uint64_t>(mean * 10));
    const int k = mean > 1000 ? 400 : 20000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < k; ++i) {
      const double x = static_cast<double>(sample_poisson(mean, ps));
      s1 += x;
      s2 += x * x;
    }
    const double mu = s1 / k;
    CHECK(std::abs(mu - mean) < 5.0 * std::sqrt(mean / k));
    CHECK((s2 / k - mu * mu) == doctest::Approx(mean).epsilon(0.2));
  }
  RandomStream z(1, 1);
  CHECK(sample_poisson(0.0, z) == 0);
}
