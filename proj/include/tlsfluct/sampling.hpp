#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "tlsfluct/random.hpp"

namespace tlsfluct {

/// A normalized probability law on [lo, hi].
///
/// Laws come in two flavours. Closed-form laws carry an analytic CDF and
/// (optionally) an analytic quantile. Numeric laws are built from an
/// unnormalized density: the normalization and a cumulative table are computed
/// by adaptive quadrature, and quantiles are found by bisection on the CDF.
/// Laws are immutable after construction and safe to share between threads.
class ProbabilityLaw {
 public:
  using Function = std::function<double(double)>;

  /// Numerically normalized law. `density` need not be normalized but must be
  /// finite and non-negative on [lo, hi].
  static ProbabilityLaw numeric(Function density, double lo, double hi,
                                std::size_t table_intervals = 512);

  /// Law with analytic pdf and cdf. `quantile` may be empty, in which case
  /// sampling falls back to root finding. `hi` may be +infinity only when a
  /// quantile is supplied.
  static ProbabilityLaw closed_form(Function pdf, Function cdf, Function quantile,
                                    double lo, double hi);

  double pdf(double x) const;
  double cdf(double x) const;

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  /// Integral of the raw density over the support (1 for closed-form laws).
  double normalization() const noexcept { return normalization_; }

  bool has_quantile() const noexcept { return static_cast<bool>(quantile_); }
  /// Analytic quantile; requires has_quantile().
  double analytic_quantile(double u) const;

 private:
  ProbabilityLaw() = default;

  double raw_integral(double a, double b) const;

  Function density_;   // raw (numeric) or normalized (closed form) pdf
  Function cdf_;       // closed form only
  Function quantile_;  // closed form only, optional
  double lo_ = 0.0;
  double hi_ = 1.0;
  double normalization_ = 1.0;
  double tolerance_ = 0.0;           // absolute quadrature tolerance, raw units
  std::vector<double> nodes_;        // numeric table abscissae
  std::vector<double> cumulative_;   // raw integral from lo to nodes_[i]
};

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

/// x in [lo, hi] with cdf(x) = u. Closed-form quantiles are used when present,
/// otherwise bisection (at most 200 iterations, width 1e-12 of the span).
/// Throws DomainError for u outside [0, 1], NumericalError on non-convergence.
double inverse_cdf_sample(const ProbabilityLaw& law, double u);

/// Quantile by bisection only, regardless of any analytic quantile.
double bisect_quantile(const ProbabilityLaw& law, double u);

// Laws used by the simulation.
ProbabilityLaw uniform_law(double lo, double hi);
ProbabilityLaw log_uniform_law(double lo, double hi);
/// Asymmetry marginal of the interacting-TLS density: (1+mu)(x/xmax)^mu / xmax on [0, xmax].
ProbabilityLaw asymmetry_law(double mu, double xmax);
/// Effective dipole law (1/p) sqrt(1 - (p/p_max)^2) on [p_min, p_max], normalized numerically.
ProbabilityLaw dipole_law(double p_min, double p_max);
/// Radial law, pdf proportional to r on [r_min, r_max].
ProbabilityLaw radial_law(double r_min, double r_max);
/// Exponential dwell law gamma exp(-gamma t) on [0, inf).
ProbabilityLaw dwell_law(double rate);

struct EnergyPair {
  double asymmetry;   // Delta
  double tunneling;   // Delta_0
};

/// Closed-form draw from the interacting-TLS (generalized) density.
EnergyPair sample_gtm_pair(double mu, double e_min, double e_max, double u1, double u2);
/// Closed-form draw from the standard density with Delta capped at `asymmetry_cap`.
EnergyPair sample_stm_pair(double asymmetry_cap, double e_min, double e_max, double u1, double u2);

/// Dipole draw by root finding on the numeric CDF of `law` (see dipole_law).
double sample_dipole(const ProbabilityLaw& law, double u);
double sample_dipole(double p_min, double p_max, double u);

double sample_radius(double r_min, double r_max, double u);
double sample_dwell(double rate, double u);

/// Zero-mean normal deviate (Box-Muller, consumes two draws).
double sample_gaussian(double sigma, RandomStream& stream);

/// Poisson count with the given mean.
std::uint64_t sample_poisson(double mean, RandomStream& stream);

}  // namespace tlsfluct
