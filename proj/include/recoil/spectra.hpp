#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <ostream>

#include "recoil/constants.hpp"

namespace recoil {

/// Complex heterodyne beat record.
struct FieldTrace {
  double sample_rate = 0.0;  // 1/s
  Eigen::VectorXcd samples;
  double f0 = 0.0;           // Hz, nominal beat frequency
  std::uint64_t seed = 0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Unit-amplitude tone at f0 with Wiener phase noise; a phase-increment
/// variance of 2 pi fwhm dt gives a Lorentzian line of full width `fwhm`.
FieldTrace synth_field(double fwhm, double f0, double duration, double sample_rate, std::uint64_t seed);

/// Two-sided power spectral density of a complex record, frequencies in
/// ascending order from -fs/2. sum(psd) * bin_width equals the mean power.
struct Spectrum {
  Eigen::VectorXd freq;
  Eigen::VectorXd psd;
  double bin_width = 0.0;             // fs / segment_length
  double resolution_bandwidth = 0.0;  // equivalent noise bandwidth of the window
};

/// Welch average of Hann-windowed periodograms.
Spectrum estimate_psd(const FieldTrace& trace, Eigen::Index segment_length, double overlap = 0.5);

struct LorentzianFit {
  double f_center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double floor = 0.0;
  double residual = 0.0;  // rms residual relative to the amplitude
  int points_above_half = 0;
  bool resolution_limited = false;
};

/// Least-squares Lorentzian plus constant floor around the dominant peak.
/// A peak narrower than the resolution is returned without a fit, with its
/// measured half-maximum width and `resolution_limited` set. Throws
/// NumericalError when there is no single dominant peak or the fit fails.
LorentzianFit fit_lorentzian_fwhm(const Spectrum& spectrum);

/// v_t = delta_t * lambda_813.
double transport_velocity(double delta_t);

struct DopplerShift {
  double delta_f_hz;
  bool out_of_model;  // |v_t| above the range where the single-emitter picture holds
};

inline constexpr double kDopplerValidVelocity = 1e-2;  // m/s

/// Relative frequency 2 v_t / lambda between counter-propagating emissions.
DopplerShift doppler_difference(double v_t, double lambda = PhysicalConstants::lambda_689);

/// Columns: freq_hz, psd.
void write_csv(std::ostream& os, const Spectrum& spectrum);

/// Text header "sample_rate f0 length\n", then little-endian float32 (re, im) pairs.
void write_field(std::ostream& os, const FieldTrace& trace);
FieldTrace read_field(const std::filesystem::path& path);

}  // namespace recoil
