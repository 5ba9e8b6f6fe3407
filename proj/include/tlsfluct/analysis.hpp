#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tlsfluct {

struct TimeSeries {
  std::vector<double> values;
  double dt_s = 1.0;
};

struct AllanCurve {
  std::vector<double> taus;
  std::vector<double> sigma;
  std::vector<std::size_t> counts;  // number of squared differences averaged
};

struct Spectrum {
  std::vector<double> freqs;  // DC excluded
  std::vector<double> psd;    // one-sided density, units^2 / Hz
  double segment_s = 0.0;
  double overlap = 0.0;
  std::size_t segments = 0;
};

struct LorentzianFit {
  double a0 = 0.0;
  double h0 = 0.0;
  double tau0 = 0.0;
  double a0_se = 0.0;
  double h0_se = 0.0;
  double tau0_se = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
};

constexpr std::size_t kMinSeriesLength = 16;

/// Roughly `per_decade` log-spaced averaging factors m in [1, n/3], as taus m * dt.
std::vector<double> default_taus(std::size_t length, double dt_s, int per_decade = 10);

/// Overlapping Allan deviation. Each tau must be a multiple of dt and at most
/// a third of the span; InsufficientDataError for series shorter than 16.
AllanCurve allan_deviation(const TimeSeries& ts, std::span<const double> taus);
AllanCurve allan_deviation(const TimeSeries& ts);

/// Welch averaged periodogram: rectangular window, per-segment mean removed,
/// one-sided density. Segments of `segment_s` overlap by `overlap`.
Spectrum welch_psd(const TimeSeries& ts, double segment_s = 25.0 * 3600.0, double overlap = 0.5);

/// sigma^2(tau) = h0/(2 tau) + (A0 tau0/tau)^2 (4 e^{-x} - e^{-2x} - 3 + 2x), x = tau/tau0.
double allan_model_variance(double tau, double a0, double h0, double tau0);
/// S(f) = h0 + 4 A0^2 tau0 / (1 + (2 pi f tau0)^2).
double psd_model(double f, double a0, double h0, double tau0);

/// tau at which the Lorentzian term of sigma^2 peaks, in units of tau0.
constexpr double kAllanPeakRatio = 1.8926;
/// Peak value of that term in units of A0^2.
constexpr double kAllanPeakHeight = 0.38114;

/// Levenberg-Marquardt fit of sigma^2 with uniform weights; standard errors from
/// the Jacobian at the solution. FitError when the fit fails.
LorentzianFit fit_allan_model(const AllanCurve& curve);
LorentzianFit fit_psd_model(const Spectrum& spectrum);

struct AnalysisReport {
  AllanCurve allan;
  Spectrum spectrum;
  std::optional<LorentzianFit> allan_fit;
  std::optional<LorentzianFit> psd_fit;
  std::string allan_fit_error;
  std::string psd_fit_error;
};

/// AD on default taus, Welch PSD and both fits; fit failures are recorded, not thrown.
AnalysisReport analyze_series(const TimeSeries& ts, double segment_s = 25.0 * 3600.0,
                              double overlap = 0.5);

std::string report_to_text(const AnalysisReport& report,
                           const std::map<std::string, std::string>& header);

/// One value per line ('#' comments allowed); dt is taken from the caller.
TimeSeries parse_series(const std::string& text, double dt_s);

}  // namespace tlsfluct
