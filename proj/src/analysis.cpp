#include "ihdp/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ihdp {

namespace {

// FFTW planning is not thread safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double mean_abs(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::complex<double>> dft_half(std::span<const double> series,
                                           Window window) {
  const std::size_t n = series.size();
  if (n == 0) throw std::invalid_argument("empty series");

  std::vector<double> in(series.begin(), series.end());
  if (window == Window::hann && n > 1) {
    for (std::size_t t = 0; t < n; ++t) {
      in[t] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                    static_cast<double>(n - 1));
    }
  }
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

Spectrum fft_magnitude(std::span<const double> series, double fs,
                       Window window) {
  if (series.size() < 2) throw std::invalid_argument("spectrum needs at least two samples");
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  const auto X = dft_half(series, window);
  Spectrum sp;
  sp.fs = fs;
  sp.n = series.size();
  sp.freqs.resize(X.size());
  sp.magnitudes.resize(X.size());
  for (std::size_t k = 0; k < X.size(); ++k) {
    sp.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(sp.n);
    sp.magnitudes[k] = std::abs(X[k]);
  }
  return sp;
}

std::vector<double> action_increments(std::span<const double> series) {
  std::vector<double> out;
  if (series.size() < 2) return out;
  out.reserve(series.size() - 1);
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    out.push_back(std::abs(series[t + 1] - series[t]));
  }
  return out;
}

SaturationLevel saturation_level(double z, double scale) {
  SaturationLevel s;
  s.output_fraction = std::tanh(z);
  s.gradient = 1.0 - s.output_fraction * s.output_fraction;
  s.output = scale * s.output_fraction;
  s.saturated = s.gradient < kSaturationGradient;
  return s;
}

double saturation_fraction(std::span<const double> z) {
  if (z.empty()) return 0.0;
  const auto n = std::count_if(z.begin(), z.end(),
                               [](double v) { return saturation_level(v).saturated; });
  return static_cast<double>(n) / static_cast<double>(z.size());
}

double fraction_within(std::span<const double> z, double bound) {
  if (z.empty()) return 0.0;
  const auto n = std::count_if(z.begin(), z.end(),
                               [&](double v) { return std::abs(v) <= bound; });
  return static_cast<double>(n) / static_cast<double>(z.size());
}

double sensitivity_measure(const Approximator& actor,
                           std::span<const double> input) {
  return actor.grad_input(input).at(0);
}

double band_energy(const Spectrum& sp, double f_lo, double f_hi) {
  if (!(f_lo >= 0.0) || !(f_lo < f_hi) || f_hi > sp.fs / 2.0 + 1e-12) {
    throw std::invalid_argument("band must satisfy 0 <= f_lo < f_hi <= fs/2");
  }
  const bool even = sp.n % 2 == 0;
  double e = 0.0;
  for (std::size_t k = 0; k < sp.magnitudes.size(); ++k) {
    if (sp.freqs[k] < f_lo || sp.freqs[k] > f_hi) continue;
    const bool unpaired = k == 0 || (even && k == sp.n / 2);
    const double m = sp.magnitudes[k];
    e += (unpaired ? 1.0 : 2.0) * m * m;
  }
  return e / (static_cast<double>(sp.n) * sp.fs);
}

SmoothnessReport smoothness_report(const ReportInputs& in) {
  SmoothnessReport r;
  const double fs = 1.0 / in.dt;
  const auto dq = action_increments(in.q_ref);
  const auto dd = action_increments(in.delta_cmd);
  r.mean_dq_ref = mean(dq);
  r.max_dq_ref = max_abs(dq);
  r.mean_ddelta = mean(dd);
  r.max_ddelta = max_abs(dd);
  const double hi = std::min(in.band_hi, fs / 2.0);
  if (in.q_ref.size() >= 2) {
    r.band_energy_q_ref = band_energy(fft_magnitude(in.q_ref, fs), in.band_lo, hi);
  }
  if (in.delta_cmd.size() >= 2) {
    r.band_energy_delta = band_energy(fft_magnitude(in.delta_cmd, fs), in.band_lo, hi);
  }
  r.saturation_high = saturation_fraction(in.z_high);
  r.saturation_low = saturation_fraction(in.z_low);
  r.mean_c1 = mean(in.c1);
  r.mean_c2 = mean(in.c2);
  r.mean_abs_k1 = mean_abs(in.k1);
  r.max_abs_k1 = max_abs(in.k1);
  r.mean_abs_k2 = mean_abs(in.k2);
  r.max_abs_k2 = max_abs(in.k2);
  if (!in.e_alpha.empty()) {
    double s = 0.0;
    for (double e : in.e_alpha) s += e * e;
    r.rms_e_alpha = std::sqrt(s / static_cast<double>(in.e_alpha.size()));
  }
  return r;
}

}  // namespace ihdp
