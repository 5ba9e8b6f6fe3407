#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlsfluct/errors.hpp"
#include "tlsfluct/random.hpp"
#include "tlsfluct/tls_physics.hpp"

using namespace tlsfluct;

TEST_CASE("TLS energy") {
  CHECK(tls_energy(0.0, 7e8) == 7e8);
  CHECK(tls_energy(300e6, 400e6) == doctest::Approx(500e6).epsilon(1e-15));
  CHECK_THROWS_AS(tls_energy(-1.0, 1.0), DomainError);
  const auto lv = TlsLevelStructure::from_energies(300e6, 400e6, MaterialParams{});
  CHECK(lv.energy_hz == doctest::Approx(500e6));
  CHECK(lv.angle_rad == doctest::Approx(std::atan(4.0 / 3.0)));
  CHECK(lv.barrier_hz >= 0.0);
}

TEST_CASE("WKB barrier and its inverse") {
  const MaterialParams m;
  CHECK(barrier_from_tunneling(m.attempt_frequency_hz, m) == 0.0);
  CHECK(barrier_from_tunneling(125e6, m) == doctest::Approx(34145278328.39).epsilon(1e-9));
  CHECK(barrier_from_tunneling(625e6, m) == doctest::Approx(1744374175.34).epsilon(1e-9));
  // prefactor hbar^2 / (2 m d^2 h)
  const double pref = barrier_from_tunneling(m.attempt_frequency_hz / std::exp(1.0), m);
  CHECK(pref == doctest::Approx(7896547017.83494).epsilon(1e-10));
  for (double d0 : {1e6, 125e6, 5e8, 9.99e8}) {
    CHECK(tunneling_from_barrier(barrier_from_tunneling(d0, m), m) ==
          doctest::Approx(d0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(barrier_from_tunneling(1.5e9, m), DomainError);
  CHECK_THROWS_AS(barrier_from_tunneling(0.0, m), DomainError);
}

TEST_CASE("switching rate") {
  const MaterialParams m;
  CHECK(m.thermal_frequency_hz() == doctest::Approx(1250197147.3997).epsilon(1e-12));
  CHECK(switching_rate(0.0, m) == doctest::Approx(0.4));
  CHECK(switching_rate(m.thermal_frequency_hz(), m) == doctest::Approx(0.4 / std::exp(1.0)));
  CHECK(switching_rate(barrier_from_tunneling(625e6, m), m) ==
        doctest::Approx(0.0991055).epsilon(1e-5));
}

TEST_CASE("interaction energy") {
  CHECK(interaction_energy(10.0, 10.0) == doctest::Approx(208366191.233).epsilon(1e-10));
  CHECK(interaction_energy(60.0, 10.0) == doctest::Approx(964658.29).epsilon(1e-8));
  CHECK(interaction_energy(1e6, 10.0) < 1e-6);
  CHECK_THROWS_AS(interaction_energy(0.0, 10.0), DomainError);
}

TEST_CASE("pair eigenenergies and frequency shift") {
  const auto e = pair_eigenenergies(4.5e9, 500e6, 300e6, 50e6);
  CHECK(e.e0_minus == doctest::Approx(-2532842712.4746190098).epsilon(1e-13));
  CHECK(e.e0_plus == doctest::Approx(-1967157287.5253809902).epsilon(1e-13));
  CHECK(e.e1_minus == doctest::Approx(2026393202.2500210304).epsilon(1e-13));
  CHECK(e.e1_plus == doctest::Approx(2473606797.7499789696).epsilon(1e-13));
  CHECK(e.e0_plus - e.e0_minus == doctest::Approx(activation_energy(500e6, 300e6, 50e6)));

  const auto s = qtls_frequency_shift(4.5e9, 500e6, 300e6, 50e6);
  CHECK(s.minus_hz == doctest::Approx(59235914.724640040119).epsilon(1e-12));
  CHECK(s.plus_hz == -s.minus_hz);

  const auto u0 = pair_eigenenergies(4.5e9, 500e6, 300e6, 0.0);
  CHECK(u0.e0_minus == doctest::Approx(-2.5e9));
  CHECK(u0.e1_plus == doctest::Approx(2.5e9));
  CHECK(qtls_frequency_shift(4.5e9, 500e6, 300e6, 0.0).minus_hz == 0.0);
  CHECK(std::abs(qtls_frequency_shift(4.5e9, 500e6, 0.0, 40e6).minus_hz) < 1e-6);
  // (E/2)^2 - U Delta + U^2 < 0 needs E_T < Delta_T, i.e. inconsistent input
  CHECK_NOTHROW(pair_eigenenergies(4.5e9, 100e6, 100e6, 40e6));
  CHECK_THROWS_AS(pair_eigenenergies(4.5e9, 100e6, 200e6, 100e6), DomainError);
}

TEST_CASE("frequency shifts cancel for random valid inputs") {
  RandomStream s(9, 0);
  for (int i = 0; i < 1000; ++i) {
    const double d = 1e9 * s.uniform();
    const double d0 = 1e8 + 9e8 * s.uniform();
    const double u = 1e6 + 2e8 * s.uniform();
    const auto f = qtls_frequency_shift(4e9 + 1e9 * s.uniform(), tls_energy(d, d0), d, u);
    CHECK(f.minus_hz + f.plus_hz == 0.0);
  }
}

TEST_CASE("qubit rate from one Q-TLS") {
  const double bare = 1.0 / 27e-6;
  CHECK(qubit_qtls_rate(1e6, 50e3, 1e7, bare) == doctest::Approx(15259.7756).epsilon(1e-8));
  CHECK(qubit_qtls_rate(3e6, 0.0, 1e7, bare) == 0.0);
  // strong coupling on resonance saturates at (Gamma_Q - Gamma_q) / 2
  CHECK(qubit_qtls_rate(0.0, 5e6, 1e7, bare) == doctest::Approx((1e7 - bare) / 2.0).epsilon(1e-12));
  // weak-coupling Lorentzian
  const double g = 1e3, df = 2e6, gq = 2e7;
  const double w = 4.0 * M_PI * df;
  const double lorentz = 4.0 * std::pow(2.0 * M_PI * g, 2) * (gq - bare) / ((gq - bare) * (gq - bare) + w * w);
  CHECK(qubit_qtls_rate(df, g, gq, bare) == doctest::Approx(lorentz).epsilon(1e-6));
  CHECK_THROWS_AS(qubit_qtls_rate(0.0, 1e5, bare, bare), DomainError);

  QubitDecayParams qp;
  CHECK(qubit_qtls_rate(1e6, 50e3, 1e7, qp) == qubit_qtls_rate(1e6, 50e3, 1e7, bare));
}

TEST_CASE("qubit rate: even, monotone in |detuning| and in g, bounded") {
  const double bare = 1.0 / 27e-6;
  RandomStream s(13, 0);
  for (int k = 0; k < 200; ++k) {
    const double gq = 1e6 * std::pow(100.0, s.uniform());
    const double g = 3e5 * s.uniform();
    double prev = std::numeric_limits<double>::infinity();
    for (double df = 0.0; df <= 5e7; df += 2.5e5) {
      const double r = qubit_qtls_rate(df, g, gq, bare);
      REQUIRE(r == doctest::Approx(qubit_qtls_rate(-df, g, gq, bare)).epsilon(1e-12));
      REQUIRE(r <= prev * (1.0 + 1e-12));
      REQUIRE(r >= 0.0);
      REQUIRE(r <= (gq - bare) / 2.0 * (1.0 + 1e-12));
      prev = r;
    }
    const double df = 5e7 * s.uniform();
    double prev_g = 0.0;
    for (double gg = 0.0; gg <= 1e6; gg += 2e4) {
      const double r = qubit_qtls_rate(df, gg, gq, bare);
      REQUIRE(r >= prev_g * (1.0 - 1e-12));
      prev_g = r;
    }
  }
}

TEST_CASE("total relaxation") {
  const double bare = 1.0 / 27e-6;
  CHECK(total_relaxation({}, bare).t1_s == doctest::Approx(27e-6).epsilon(1e-14));
  const std::vector<double> one{bare};
  CHECK(total_relaxation(one, bare).t1_s == doctest::Approx(13.5e-6).epsilon(1e-14));
  const std::vector<double> a{1.0, 2.0, 3.0}, b{3.0, 1.0, 2.0};
  CHECK(total_relaxation(a, bare).rate == total_relaxation(b, bare).rate);
  const std::vector<double> bad{-1.0};
  CHECK_THROWS_AS(total_relaxation(bad, bare), DomainError);
}

TEST_CASE("decay envelope oracle") {
  const double bare = 1.0 / 27e-6;
  std::vector<double> ts;
  for (int i = 0; i < 200; ++i) ts.push_back(i * 5e-7);
  const auto p = decay_envelope_oracle(3e6, 1e5, 2e7, bare, ts);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : p) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
  const auto free = decay_envelope_oracle(3e6, 0.0, 2e7, bare, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(free[i] == doctest::Approx(std::exp(-bare * ts[i])).epsilon(1e-10));
  }
  const double predicted = bare + qubit_qtls_rate(1e6, 50e3, 1e7, bare);
  CHECK(fitted_envelope_rate(1e6, 50e3, 1e7, bare) == doctest::Approx(predicted).epsilon(0.1));
}
