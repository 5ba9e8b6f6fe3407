#include "tlsfluct/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tlsfluct/constants.hpp"
#include "tlsfluct/errors.hpp"

namespace tlsfluct {

namespace {

constexpr double kRelativeQuadratureTolerance = 1e-10;
constexpr double kQuantileTolerance = 1e-12;  // fraction of the support span
constexpr int kMaxBisections = 200;

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream msg;
    msg << "quantile " << u << " outside [0, 1]";
    throw DomainError(msg.str());
  }
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

ProbabilityLaw ProbabilityLaw::numeric(Function density, double lo, double hi,
                                       std::size_t table_intervals) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "numeric law needs finite lo < hi");
  require(table_intervals >= 1, "numeric law needs at least one table interval");

  ProbabilityLaw law;
  law.density_ = std::move(density);
  law.lo_ = lo;
  law.hi_ = hi;

  // Coarse composite Simpson estimate to scale the absolute tolerance.
  constexpr int coarse = 4096;
  const double h = (hi - lo) / coarse;
  double rough = law.density_(lo) + law.density_(hi);
  for (int i = 1; i < coarse; ++i) {
    rough += law.density_(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  rough *= h / 3.0;
  if (!(rough > 0.0) || !std::isfinite(rough)) {
    throw NumericalError("density integrates to a non-positive or non-finite value");
  }
  law.tolerance_ =
      kRelativeQuadratureTolerance * rough / static_cast<double>(table_intervals);

  law.nodes_.resize(table_intervals + 1);
  law.cumulative_.resize(table_intervals + 1);
  law.nodes_[0] = lo;
  law.cumulative_[0] = 0.0;
  for (std::size_t i = 1; i <= table_intervals; ++i) {
    law.nodes_[i] = i == table_intervals
                        ? hi
                        : lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(table_intervals);
    law.cumulative_[i] = law.cumulative_[i - 1] +
                         integrate(law.density_, law.nodes_[i - 1], law.nodes_[i], law.tolerance_);
  }
  law.normalization_ = law.cumulative_.back();
  return law;
}

ProbabilityLaw ProbabilityLaw::closed_form(Function pdf, Function cdf, Function quantile,
                                           double lo, double hi) {
  require(lo < hi, "closed-form law needs lo < hi");
  require(std::isfinite(hi) || static_cast<bool>(quantile),
          "unbounded support requires an analytic quantile");
  ProbabilityLaw law;
  law.density_ = std::move(pdf);
  law.cdf_ = std::move(cdf);
  law.quantile_ = std::move(quantile);
  law.lo_ = lo;
  law.hi_ = hi;
  return law;
}

double ProbabilityLaw::pdf(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  return cdf_ ? density_(x) : density_(x) / normalization_;
}

double ProbabilityLaw::raw_integral(double a, double b) const {
  return integrate(density_, a, b, tolerance_);
}

double ProbabilityLaw::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  if (cdf_) return cdf_(x);
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const auto i = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
  const double value = (cumulative_[i] + raw_integral(nodes_[i], x)) / normalization_;
  return std::clamp(value, 0.0, 1.0);
}

double ProbabilityLaw::analytic_quantile(double u) const {
  if (!quantile_) throw NumericalError("law has no analytic quantile");
  return quantile_(u);
}

double bisect_quantile(const ProbabilityLaw& law, double u) {
  check_quantile(u);
  if (u == 0.0) return law.lo();
  if (u == 1.0) return law.hi();
  if (!std::isfinite(law.hi())) {
    throw NumericalError("bisection needs a bounded support");
  }

  double a = law.lo();
  double b = law.hi();
  const double width = kQuantileTolerance * (b - a);
  for (int iter = 0; iter < kMaxBisections; ++iter) {
    if (b - a <= width) return 0.5 * (a + b);
    const double m = 0.5 * (a + b);
    if (law.cdf(m) < u) {
      a = m;
    } else {
      b = m;
    }
  }
  std::ostringstream msg;
  msg << "bisection did not converge for u=" << u << " after " << kMaxBisections
      << " iterations";
  throw NumericalError(msg.str());
}

double inverse_cdf_sample(const ProbabilityLaw& law, double u) {
  check_quantile(u);
  if (u == 0.0) return law.lo();
  if (u == 1.0) return law.hi();
  if (law.has_quantile()) {
    return std::clamp(law.analytic_quantile(u), law.lo(), law.hi());
  }
  return bisect_quantile(law, u);
}

ProbabilityLaw uniform_law(double lo, double hi) {
  require(lo < hi, "uniform law needs lo < hi");
  const double span = hi - lo;
  return ProbabilityLaw::closed_form(
      [span](double) { return 1.0 / span; },
      [lo, span](double x) { return (x - lo) / span; },
      [lo, span](double u) { return lo + u * span; }, lo, hi);
}

ProbabilityLaw log_uniform_law(double lo, double hi) {
  require(0.0 < lo && lo < hi, "log-uniform law needs 0 < lo < hi");
  const double log_ratio = std::log(hi / lo);
  return ProbabilityLaw::closed_form(
      [log_ratio](double x) { return 1.0 / (x * log_ratio); },
      [lo, log_ratio](double x) { return std::log(x / lo) / log_ratio; },
      [lo, hi](double u) { return lo * std::pow(hi / lo, u); }, lo, hi);
}

ProbabilityLaw asymmetry_law(double mu, double xmax) {
  require(0.0 < mu && mu < 1.0, "asymmetry law needs 0 < mu < 1");
  require(xmax > 0.0, "asymmetry law needs xmax > 0");
  return ProbabilityLaw::closed_form(
      [mu, xmax](double x) { return (1.0 + mu) * std::pow(x / xmax, mu) / xmax; },
      [mu, xmax](double x) { return std::pow(x / xmax, 1.0 + mu); },
      [mu, xmax](double u) { return xmax * std::pow(u, 1.0 / (1.0 + mu)); }, 0.0, xmax);
}

ProbabilityLaw dipole_law(double p_min, double p_max) {
  require(0.0 < p_min && p_min < p_max, "dipole law needs 0 < p_min < p_max");
  return ProbabilityLaw::numeric(
      [p_max](double p) {
        const double r = p / p_max;
        return std::sqrt(std::max(0.0, 1.0 - r * r)) / p;
      },
      p_min, p_max);
}

ProbabilityLaw radial_law(double r_min, double r_max) {
  require(0.0 < r_min && r_min < r_max, "radial law needs 0 < r_min < r_max");
  const double lo2 = r_min * r_min;
  const double span2 = r_max * r_max - lo2;
  return ProbabilityLaw::closed_form(
      [span2](double r) { return 2.0 * r / span2; },
      [lo2, span2](double r) { return (r * r - lo2) / span2; },
      [lo2, span2](double u) { return std::sqrt(lo2 + u * span2); }, r_min, r_max);
}

ProbabilityLaw dwell_law(double rate) {
  require(rate > 0.0, "dwell law needs a positive rate");
  return ProbabilityLaw::closed_form(
      [rate](double t) { return rate * std::exp(-rate * t); },
      [rate](double t) { return -std::expm1(-rate * t); },
      [rate](double u) { return -std::log1p(-u) / rate; }, 0.0,
      std::numeric_limits<double>::infinity());
}

EnergyPair sample_gtm_pair(double mu, double e_min, double e_max, double u1, double u2) {
  require(0.0 < mu && mu < 1.0, "GTM pair needs 0 < mu < 1");
  require(0.0 < e_min && e_min < e_max, "GTM pair needs 0 < E_min < E_max");
  check_quantile(u1);
  check_quantile(u2);
  return {e_max * std::pow(u1, 1.0 / (1.0 + mu)), e_min * std::pow(e_max / e_min, u2)};
}

EnergyPair sample_stm_pair(double asymmetry_cap, double e_min, double e_max, double u1,
                           double u2) {
  require(asymmetry_cap > 0.0, "STM pair needs a positive asymmetry cap");
  require(0.0 < e_min && e_min < e_max, "STM pair needs 0 < E_min < E_max");
  check_quantile(u1);
  check_quantile(u2);
  return {asymmetry_cap * u1, e_min * std::pow(e_max / e_min, u2)};
}

double sample_dipole(const ProbabilityLaw& law, double u) { return bisect_quantile(law, u); }

double sample_dipole(double p_min, double p_max, double u) {
  return sample_dipole(dipole_law(p_min, p_max), u);
}

double sample_radius(double r_min, double r_max, double u) {
  require(0.0 < r_min && r_min < r_max, "radius needs 0 < r_min < r_max");
  check_quantile(u);
  return std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
}

double sample_dwell(double rate, double u) {
  require(rate > 0.0, "dwell time needs a positive rate");
  check_quantile(u);
  return -std::log1p(-u) / rate;
}

double sample_gaussian(double sigma, RandomStream& stream) {
  require(sigma >= 0.0, "Gaussian needs sigma >= 0");
  const double u1 = stream.uniform_positive();
  const double u2 = stream.uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * constants::pi * u2);
}

std::uint64_t sample_poisson(double mean, RandomStream& stream) {
  require(mean >= 0.0 && std::isfinite(mean), "Poisson needs a finite mean >= 0");
  if (mean == 0.0) return 0;
  if (mean > 1e7) {
    // Normal approximation; relative error ~1/sqrt(mean).
    const double x = std::round(mean + std::sqrt(mean) * sample_gaussian(1.0, stream));
    return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
  }
  // Count unit-rate arrivals in [0, mean].
  std::uint64_t count = 0;
  double t = -std::log(stream.uniform_positive());
  while (t <= mean) {
    ++count;
    t -= std::log(stream.uniform_positive());
  }
  return count;
}

}  // namespace tlsfluct
