#include "tlsfluct/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include <fftw3.h>
#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "tlsfluct/constants.hpp"
#include "tlsfluct/digest.hpp"
#include "tlsfluct/errors.hpp"

namespace tlsfluct {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

void require_length(const TimeSeries& ts) {
  if (!(ts.dt_s > 0.0) || !std::isfinite(ts.dt_s)) throw DomainError("series spacing must be > 0");
  if (ts.values.size() < kMinSeriesLength) {
    throw InsufficientDataError("series has " + std::to_string(ts.values.size()) +
                                " samples, need at least " + std::to_string(kMinSeriesLength));
  }
}

// 4 e^{-x} - e^{-2x} - 3 + 2x, which behaves like (2/3) x^3 near zero.
double allan_bracket(double x) {
  if (x < 1e-2) {
    return x * x * x * (2.0 / 3.0 + x * (-0.5 + x * (7.0 / 30.0 + x * (-1.0 / 12.0 + x * 31.0 / 1260.0))));
  }
  return 4.0 * std::expm1(-x) - std::expm1(-2.0 * x) + 2.0 * x;
}

// d/dx of the bracket.
double allan_bracket_derivative(double x) {
  return -4.0 * std::expm1(-x) + 2.0 * std::expm1(-2.0 * x);
}

struct ModelPoint {
  double value;
  Eigen::Vector3d grad;  // d/d(A0, h0, tau0)
};

ModelPoint allan_point(double tau, double a0, double h0, double tau0) {
  const double x = tau / tau0;
  const double b = allan_bracket(x);
  const double ratio2 = tau0 * tau0 / (tau * tau);
  ModelPoint p;
  p.value = h0 / (2.0 * tau) + a0 * a0 * ratio2 * b;
  p.grad << 2.0 * a0 * ratio2 * b, 1.0 / (2.0 * tau),
      a0 * a0 / (tau * tau) * (2.0 * tau0 * b - tau * allan_bracket_derivative(x));
  return p;
}

ModelPoint psd_point(double f, double a0, double h0, double tau0) {
  const double w = two_pi * f * tau0;
  const double d = 1.0 + w * w;
  ModelPoint p;
  p.value = h0 + 4.0 * a0 * a0 * tau0 / d;
  p.grad << 8.0 * a0 * tau0 / d, 1.0, 4.0 * a0 * a0 * (1.0 - w * w) / (d * d);
  return p;
}

using PointFn = ModelPoint (*)(double, double, double, double);

struct Guess {
  double a0;
  double h0;
  double tau0;
};

// Internal coordinates: A0 = u0 sA, tau0 = sT e^{u2}, and h0 = sH u1 (linear)
// or sH e^{u1} (log, used to keep h0 positive on the retry).
struct FitProblem : Eigen::DenseFunctor<double> {
  FitProblem(const std::vector<double>& x, const std::vector<double>& y, PointFn fn, Guess scale,
             bool log_h0)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(x.size())),
        x(x),
        y(y),
        fn(fn),
        scale(scale),
        log_h0(log_h0) {
    y_scale = 0.0;
    for (double v : y) y_scale = std::max(y_scale, std::abs(v));
    if (!(y_scale > 0.0)) y_scale = 1.0;
  }

  Guess params(const Eigen::VectorXd& u) const {
    return {u[0] * scale.a0, log_h0 ? scale.h0 * std::exp(u[1]) : scale.h0 * u[1],
            scale.tau0 * std::exp(u[2])};
  }

  int operator()(const Eigen::VectorXd& u, Eigen::VectorXd& fvec) const {
    const Guess p = params(u);
    for (std::size_t i = 0; i < x.size(); ++i) {
      fvec[static_cast<Eigen::Index>(i)] = (fn(x[i], p.a0, p.h0, p.tau0).value - y[i]) / y_scale;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& u, Eigen::MatrixXd& fjac) const {
    const Guess p = params(u);
    const double dh = log_h0 ? p.h0 : scale.h0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto g = fn(x[i], p.a0, p.h0, p.tau0).grad;
      const auto row = static_cast<Eigen::Index>(i);
      fjac(row, 0) = g[0] * scale.a0 / y_scale;
      fjac(row, 1) = g[1] * dh / y_scale;
      fjac(row, 2) = g[2] * p.tau0 / y_scale;
    }
    return 0;
  }

  const std::vector<double>& x;
  const std::vector<double>& y;
  PointFn fn;
  Guess scale;
  bool log_h0;
  double y_scale;
};

bool converged(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  return s == RelativeReductionTooSmall || s == RelativeErrorTooSmall ||
         s == RelativeErrorAndReductionTooSmall || s == CosinusTooSmall || s == FtolTooSmall ||
         s == XtolTooSmall || s == GtolTooSmall;
}

LorentzianFit run_fit(const char* what, const std::vector<double>& x, const std::vector<double>& y,
                      PointFn fn, Guess guess) {
  std::string trace;
  for (bool log_h0 : {false, true}) {
    FitProblem problem(x, y, fn, guess, log_h0);
    Eigen::LevenbergMarquardt<FitProblem> lm(problem);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.setGtol(0.0);
    lm.setMaxfev(4000);
    Eigen::VectorXd u(3);
    u << 1.0, log_h0 ? 0.0 : 1.0, 0.0;
    const auto status = lm.minimize(u);
    const Guess p = problem.params(u);
    std::ostringstream attempt;
    attempt << (log_h0 ? " log-h0 retry" : " unconstrained") << ": status " << status << " after "
            << lm.iterations() << " iterations, A0=" << p.a0 << " h0=" << p.h0
            << " tau0=" << p.tau0 << ";";
    trace += attempt.str();
    if (!converged(status)) continue;

    LorentzianFit fit;
    fit.a0 = std::abs(p.a0);
    fit.h0 = p.h0;
    fit.tau0 = p.tau0;
    if (!(fit.a0 > 0.0 && fit.h0 > 0.0 && fit.tau0 > 0.0) || !std::isfinite(fit.a0) ||
        !std::isfinite(fit.h0) || !std::isfinite(fit.tau0)) {
      continue;
    }

    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd jac(n, 3);
    double rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto pt = fn(x[static_cast<std::size_t>(i)], fit.a0, fit.h0, fit.tau0);
      jac.row(i) = pt.grad.transpose();
      const double r = pt.value - y[static_cast<std::size_t>(i)];
      rss += r * r;
    }
    fit.residual_norm = std::sqrt(rss);
    fit.iterations = static_cast<int>(lm.iterations());
    // Relative coordinates p_i = s_i q_i keep the normal matrix well scaled.
    const Eigen::Vector3d s(fit.a0, fit.h0, fit.tau0);
    const Eigen::MatrixXd jq = jac * s.asDiagonal();
    const Eigen::Matrix3d normal = jq.transpose() * jq;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    if (lu.isInvertible()) {
      const Eigen::Matrix3d cov = lu.inverse() * (rss / static_cast<double>(n - 3));
      fit.a0_se = s[0] * std::sqrt(std::max(0.0, cov(0, 0)));
      fit.h0_se = s[1] * std::sqrt(std::max(0.0, cov(1, 1)));
      fit.tau0_se = s[2] * std::sqrt(std::max(0.0, cov(2, 2)));
    } else {
      fit.a0_se = fit.h0_se = fit.tau0_se = std::numeric_limits<double>::infinity();
    }
    return fit;
  }
  throw FitError(std::string(what) + " fit did not reach a positive solution:" + trace);
}

}  // namespace

std::vector<double> default_taus(std::size_t length, double dt_s, int per_decade) {
  const std::size_t m_max = length / 3;
  std::vector<double> taus;
  if (m_max < 1) return taus;
  const double decades = std::log10(static_cast<double>(m_max));
  const int steps = std::max(1, static_cast<int>(std::ceil(decades * per_decade)));
  std::size_t last = 0;
  for (int i = 0; i <= steps; ++i) {
    const auto m = static_cast<std::size_t>(std::llround(std::pow(10.0, decades * i / steps)));
    if (m > last && m <= m_max) {
      taus.push_back(static_cast<double>(m) * dt_s);
      last = m;
    }
  }
  return taus;
}

AllanCurve allan_deviation(const TimeSeries& ts, std::span<const double> taus) {
  require_length(ts);
  const std::size_t n = ts.values.size();
  // Prefix sums of the offsets from the first sample: exact zeros for a constant series.
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + (ts.values[i] - ts.values[0]);

  AllanCurve curve;
  double previous = 0.0;
  for (double tau : taus) {
    if (!(tau > previous)) throw DomainError("taus must be positive and strictly increasing");
    previous = tau;
    const double m_real = tau / ts.dt_s;
    const auto m = static_cast<std::size_t>(std::llround(m_real));
    if (m < 1 || std::abs(m_real - static_cast<double>(m)) > 1e-9 * m_real) {
      throw DomainError("tau " + format_double(tau) + " s is not a multiple of dt");
    }
    if (3 * m > n) {
      throw InsufficientDataError("tau " + format_double(tau) + " s exceeds a third of the span");
    }
    const std::size_t count = n - 2 * m + 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = (cum[i + 2 * m] - 2.0 * cum[i + m] + cum[i]) / static_cast<double>(m);
      acc += d * d;
    }
    curve.taus.push_back(tau);
    curve.sigma.push_back(std::sqrt(0.5 * acc / static_cast<double>(count)));
    curve.counts.push_back(count);
  }
  return curve;
}

AllanCurve allan_deviation(const TimeSeries& ts) {
  require_length(ts);
  const auto taus = default_taus(ts.values.size(), ts.dt_s);
  return allan_deviation(ts, taus);
}

Spectrum welch_psd(const TimeSeries& ts, double segment_s, double overlap) {
  require_length(ts);
  if (!(overlap >= 0.0 && overlap < 1.0)) throw DomainError("overlap must lie in [0, 1)");
  const std::size_t n = ts.values.size();
  const auto len = static_cast<std::size_t>(std::llround(segment_s / ts.dt_s));
  if (len < 4) throw DomainError("segment shorter than four samples");
  if (len > n) {
    throw InsufficientDataError("segment of " + format_double(segment_s) + " s exceeds the " +
                                format_double(static_cast<double>(n) * ts.dt_s) + " s series");
  }
  const std::size_t step =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len * (1.0 - overlap))));
  const std::size_t segments = (n - len) / step + 1;
  const std::size_t bins = len / 2 + 1;

  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(len), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(bins), &fftw_free);
  if (!in || !out) throw NumericalError("FFT buffer allocation failed");
  const fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in.get(), out.get(), FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericalError("FFT plan creation failed");

  std::vector<double> power(bins, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const double* seg = ts.values.data() + s * step;
    const double mean = std::accumulate(seg, seg + len, 0.0) / static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) in.get()[i] = seg[i] - mean;
    fftw_execute(plan);
    for (std::size_t k = 0; k < bins; ++k) {
      power[k] += out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
    }
  }
  fftw_destroy_plan(plan);

  Spectrum spec;
  spec.segment_s = static_cast<double>(len) * ts.dt_s;
  spec.overlap = overlap;
  spec.segments = segments;
  const double norm = ts.dt_s / (static_cast<double>(len) * static_cast<double>(segments));
  for (std::size_t k = 1; k < bins; ++k) {
    const bool nyquist = (len % 2 == 0) && k == len / 2;
    spec.freqs.push_back(static_cast<double>(k) / spec.segment_s);
    spec.psd.push_back(power[k] * norm * (nyquist ? 1.0 : 2.0));
  }
  return spec;
}

double allan_model_variance(double tau, double a0, double h0, double tau0) {
  return allan_point(tau, a0, h0, tau0).value;
}

double psd_model(double f, double a0, double h0, double tau0) {
  return psd_point(f, a0, h0, tau0).value;
}

LorentzianFit fit_allan_model(const AllanCurve& curve) {
  const std::size_t n = curve.taus.size();
  if (n < 8 || curve.sigma.size() != n) {
    throw InsufficientDataError("Allan fit needs at least 8 tau points");
  }
  std::vector<double> var(n);
  for (std::size_t i = 0; i < n; ++i) var[i] = curve.sigma[i] * curve.sigma[i];
  const auto peak = static_cast<std::size_t>(std::max_element(var.begin(), var.end()) - var.begin());
  if (!(var[peak] > 0.0)) throw FitError("Allan fit: the curve is identically zero");

  Guess g;
  g.tau0 = curve.taus[peak] / kAllanPeakRatio;
  g.a0 = std::sqrt(var[peak] / kAllanPeakHeight);
  double h = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double lorentz = allan_model_variance(curve.taus[i], g.a0, 0.0, g.tau0);
    h += 0.5 * 2.0 * curve.taus[i] * (var[i] - lorentz);
  }
  g.h0 = h > 0.0 ? h : 1e-3 * g.a0 * g.a0 * g.tau0;
  return run_fit("Allan", curve.taus, var, &allan_point, g);
}

LorentzianFit fit_psd_model(const Spectrum& spectrum) {
  const std::size_t n = spectrum.freqs.size();
  if (n < 8 || spectrum.psd.size() != n) {
    throw InsufficientDataError("PSD fit needs at least 8 frequency bins");
  }
  std::vector<double> upper(spectrum.psd.begin() + static_cast<std::ptrdiff_t>(n / 2), spectrum.psd.end());
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(upper.size() / 2), upper.end());
  const double floor = upper[upper.size() / 2];
  const std::size_t head = std::min<std::size_t>(3, n);
  double plateau =
      std::accumulate(spectrum.psd.begin(), spectrum.psd.begin() + static_cast<std::ptrdiff_t>(head), 0.0) /
          static_cast<double>(head) - floor;
  if (!(plateau > 0.0)) plateau = *std::max_element(spectrum.psd.begin(), spectrum.psd.end());
  if (!(plateau > 0.0)) throw FitError("PSD fit: the spectrum is identically zero");

  std::size_t knee = n - 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (spectrum.psd[k] - floor < 0.5 * plateau) {
      knee = k;
      break;
    }
  }
  Guess g;
  g.tau0 = 1.0 / (two_pi * spectrum.freqs[knee]);
  g.a0 = std::sqrt(plateau / (4.0 * g.tau0));
  g.h0 = floor > 0.0 ? floor : 1e-3 * plateau;
  return run_fit("PSD", spectrum.freqs, spectrum.psd, &psd_point, g);
}

AnalysisReport analyze_series(const TimeSeries& ts, double segment_s, double overlap) {
  AnalysisReport report;
  report.allan = allan_deviation(ts);
  report.spectrum = welch_psd(ts, segment_s, overlap);
  try {
    report.allan_fit = fit_allan_model(report.allan);
  } catch (const Error& e) {
    report.allan_fit_error = e.what();
  }
  try {
    report.psd_fit = fit_psd_model(report.spectrum);
  } catch (const Error& e) {
    report.psd_fit_error = e.what();
  }
  return report;
}

namespace {

void write_fit(std::ostringstream& out, const char* name, const std::optional<LorentzianFit>& fit,
               const std::string& error) {
  out << "[" << name << "]\n";
  if (!fit) {
    out << "status = failed\nerror = " << error << "\n\n";
    return;
  }
  out << "status = ok\n";
  out << "A0 = " << format_double(fit->a0) << "\nA0_se = " << format_double(fit->a0_se) << "\n";
  out << "h0 = " << format_double(fit->h0) << "\nh0_se = " << format_double(fit->h0_se) << "\n";
  out << "tau0_s = " << format_double(fit->tau0) << "\ntau0_se_s = " << format_double(fit->tau0_se)
      << "\n";
  out << "inv_tau0_hz = " << format_double(1.0 / fit->tau0)
      << "\ninv_tau0_se_hz = " << format_double(fit->tau0_se / (fit->tau0 * fit->tau0)) << "\n";
  out << "residual_norm = " << format_double(fit->residual_norm) << "\n";
  out << "iterations = " << fit->iterations << "\n\n";
}

}  // namespace

std::string report_to_text(const AnalysisReport& report,
                           const std::map<std::string, std::string>& header) {
  std::ostringstream out;
  out << "# tlsfluct analysis";
  for (const auto& [k, v] : header) out << " " << k << "=" << v;
  out << "\n\n";
  write_fit(out, "allan_fit", report.allan_fit, report.allan_fit_error);
  write_fit(out, "psd_fit", report.psd_fit, report.psd_fit_error);
  out << "[allan]\ntau_s\tsigma\tcount\n";
  for (std::size_t i = 0; i < report.allan.taus.size(); ++i) {
    out << format_double(report.allan.taus[i]) << "\t" << format_double(report.allan.sigma[i]) << "\t"
        << report.allan.counts[i] << "\n";
  }
  out << "\n[psd]\nsegment_s = " << format_double(report.spectrum.segment_s)
      << "\noverlap = " << format_double(report.spectrum.overlap)
      << "\nsegments = " << report.spectrum.segments << "\nf_hz\tS\n";
  for (std::size_t i = 0; i < report.spectrum.freqs.size(); ++i) {
    out << format_double(report.spectrum.freqs[i]) << "\t" << format_double(report.spectrum.psd[i])
        << "\n";
  }
  return out.str();
}

TimeSeries parse_series(const std::string& text, double dt_s) {
  TimeSeries ts;
  ts.dt_s = dt_s;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    std::string extra;
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v) ||
        (tokens >> extra)) {
      throw SchemaError("series line " + std::to_string(line_no) + ": expected one number");
    }
    ts.values.push_back(v);
  }
  return ts;
}

}  // namespace tlsfluct
