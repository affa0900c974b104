#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ihdp/approximator.hpp"

namespace ihdp {

enum class Window { none, hann };

// Single-sided raw DFT magnitudes, bins k = 0 .. n/2 at k fs / n.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> magnitudes;
  double fs = 0.0;
  std::size_t n = 0;
};

// Non-negative half of the DFT, X_k = sum_t x_t exp(-2 pi i k t / n).
std::vector<std::complex<double>> dft_half(std::span<const double> series,
                                           Window window = Window::none);

Spectrum fft_magnitude(std::span<const double> series, double fs,
                       Window window = Window::none);

// |x_{t+1} - x_t|; empty for fewer than two samples.
std::vector<double> action_increments(std::span<const double> series);

// tanh derivative below this marks a saturated unit.
inline constexpr double kSaturationGradient = 0.1;

struct SaturationLevel {
  double output_fraction = 0.0;  // tanh(z), the output as a fraction of scale
  double gradient = 0.0;         // 1 - tanh(z)^2
  double output = 0.0;           // scale tanh(z)
  bool saturated = false;
};

SaturationLevel saturation_level(double z, double scale = 1.0);
// Fraction of pre-activations whose tanh derivative is below the threshold.
double saturation_fraction(std::span<const double> z);
// Fraction of pre-activations inside [-bound, bound].
double fraction_within(std::span<const double> z, double bound);

// d actor / d (tracking-error input), the error being input 0.
double sensitivity_measure(const Approximator& actor,
                           std::span<const double> input);

// Spectral energy over [f_lo, f_hi] in signal-units^2 * s. One-sided bins are
// weighted so the band [0, fs/2] equals sum(x^2) / fs exactly.
double band_energy(const Spectrum& sp, double f_lo, double f_hi);

// Summary of one run's action smoothness and learning health.
struct SmoothnessReport {
  double mean_dq_ref = 0.0;
  double max_dq_ref = 0.0;
  double mean_ddelta = 0.0;
  double max_ddelta = 0.0;
  double band_energy_q_ref = 0.0;
  double band_energy_delta = 0.0;
  double saturation_high = 0.0;
  double saturation_low = 0.0;
  double mean_c1 = 0.0;
  double mean_c2 = 0.0;
  double mean_abs_k1 = 0.0;
  double max_abs_k1 = 0.0;
  double mean_abs_k2 = 0.0;
  double max_abs_k2 = 0.0;
  double rms_e_alpha = 0.0;
};

// Series a report is built from. The q reference is whichever one the lower
// agent tracked; delta is the commanded deflection.
struct ReportInputs {
  std::span<const double> q_ref;
  std::span<const double> delta_cmd;
  std::span<const double> z_high;
  std::span<const double> z_low;
  std::span<const double> c1;
  std::span<const double> c2;
  std::span<const double> k1;
  std::span<const double> k2;
  std::span<const double> e_alpha;
  double dt = 0.001;
  double band_lo = 10.0;
  double band_hi = 40.0;
};

SmoothnessReport smoothness_report(const ReportInputs& in);

}  // namespace ihdp
