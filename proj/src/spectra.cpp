#include "recoil/spectra.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "recoil/csv.hpp"
#include "recoil/errors.hpp"

namespace recoil {

namespace {

/// A / (1 + ((f - fc) / (w / 2))^2) + C with parameters (A, fc, w, C).
struct LorentzianResidual : Eigen::DenseFunctor<double> {
  LorentzianResidual(Eigen::VectorXd x, Eigen::VectorXd y)
      : Eigen::DenseFunctor<double>(4, static_cast<int>(x.size())), x_(std::move(x)), y_(std::move(y)) {}

  int operator()(const InputType& p, ValueType& fvec) const {
    const double hw = 0.5 * p[2];
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      const double u = (x_[i] - p[1]) / hw;
      fvec[i] = p[0] / (1.0 + u * u) + p[3] - y_[i];
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    const double hw = 0.5 * p[2];
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
      const double u = (x_[i] - p[1]) / hw;
      const double d = 1.0 + u * u;
      jac(i, 0) = 1.0 / d;
      jac(i, 1) = p[0] * 2.0 * u / (d * d * hw);
      jac(i, 2) = p[0] * u * u / (d * d * p[2]) * 2.0;
      jac(i, 3) = 1.0;
    }
    return 0;
  }

 private:
  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
};

float to_little_endian(float v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = __builtin_bswap32(bits);
    std::memcpy(&v, &bits, sizeof bits);
    return v;
  }
}

}  // namespace

FieldTrace synth_field(double fwhm, double f0, double duration, double sample_rate, std::uint64_t seed) {
  if (!(fwhm >= 0.0)) throw DomainError("fwhm must be >= 0");
  if (!(duration > 0.0)) throw DomainError("duration must be > 0");
  if (!(sample_rate > 2.0 * std::abs(f0))) throw DomainError("sample_rate must exceed 2 f0");
  const auto count = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  if (count < 2) throw DomainError("trace would hold fewer than two samples");

  FieldTrace trace;
  trace.sample_rate = sample_rate;
  trace.f0 = f0;
  trace.seed = seed;
  trace.samples.resize(count);

  const double dt = 1.0 / sample_rate;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, std::sqrt(kTwoPi * fwhm * dt));
  double phase_noise = 0.0;
  for (Eigen::Index k = 0; k < count; ++k) {
    // Carrier phase reduced per sample to keep it accurate over long records.
    const double carrier = kTwoPi * std::fmod(f0 * static_cast<double>(k) * dt, 1.0);
    trace.samples[k] = std::polar(1.0, carrier + phase_noise);
    if (fwhm > 0.0) phase_noise += step(rng);
  }
  return trace;
}

Spectrum estimate_psd(const FieldTrace& trace, Eigen::Index segment_length, double overlap) {
  const Eigen::Index n = trace.samples.size();
  if (segment_length < 2 || segment_length > n) throw DomainError("segment_length must lie in [2, sample count]");
  if (!(overlap >= 0.0 && overlap <= 0.9)) throw DomainError("overlap must lie in [0, 0.9]");
  const Eigen::Index hop = std::max<Eigen::Index>(1, segment_length - std::llround(overlap * segment_length));
  const Eigen::Index segments = 1 + (n - segment_length) / hop;

  const Eigen::Index len = segment_length;
  const Eigen::ArrayXd window =
      0.5 * (1.0 - (Eigen::ArrayXd::LinSpaced(len, 0.0, static_cast<double>(len - 1)) * (kTwoPi / len)).cos());
  const double window_power = window.square().sum();
  const double fs = trace.sample_rate;

  Eigen::FFT<double> fft;
  Eigen::VectorXcd buffer(len);
  Eigen::VectorXcd spectrum(len);
  Eigen::ArrayXd accumulated = Eigen::ArrayXd::Zero(len);
  for (Eigen::Index s = 0; s < segments; ++s) {
    buffer = (trace.samples.segment(s * hop, len).array() * window).matrix();
    fft.fwd(spectrum, buffer);
    accumulated += spectrum.array().abs2();
  }
  accumulated /= static_cast<double>(segments) * fs * window_power;

  // Reorder to ascending frequency starting at -fs/2.
  Spectrum out;
  out.freq.resize(len);
  out.psd.resize(len);
  const Eigen::Index negative = len / 2;
  for (Eigen::Index i = 0; i < len; ++i) {
    const Eigen::Index k = (i + len - negative) % len;
    const Eigen::Index signed_k = k < len - negative ? k : k - len;
    out.freq[i] = static_cast<double>(signed_k) * fs / static_cast<double>(len);
    out.psd[i] = accumulated[k];
  }
  out.bin_width = fs / static_cast<double>(len);
  out.resolution_bandwidth = fs * window_power / (window.sum() * window.sum());
  return out;
}

LorentzianFit fit_lorentzian_fwhm(const Spectrum& spectrum) {
  const Eigen::Index size = spectrum.psd.size();
  if (size < 5) throw NumericalError("fit_lorentzian_fwhm: spectrum too short");

  Eigen::Index peak = 0;
  const double peak_value = spectrum.psd.maxCoeff(&peak);
  std::vector<double> sorted(spectrum.psd.data(), spectrum.psd.data() + size);
  std::nth_element(sorted.begin(), sorted.begin() + size / 2, sorted.end());
  const double floor = sorted[static_cast<std::size_t>(size / 2)];
  if (!(peak_value > 4.0 * floor) || !(peak_value > 0.0))
    throw NumericalError("fit_lorentzian_fwhm: no dominant peak above the floor");

  const double half = floor + 0.5 * (peak_value - floor);
  Eigen::Index left = peak;
  while (left > 0 && spectrum.psd[left] >= half) --left;
  Eigen::Index right = peak;
  while (right < size - 1 && spectrum.psd[right] >= half) ++right;
  if (spectrum.psd[left] >= half || spectrum.psd[right] >= half)
    throw NumericalError("fit_lorentzian_fwhm: peak runs into the spectrum edge");

  auto crossing = [&](Eigen::Index below, Eigen::Index above) {
    const double y0 = spectrum.psd[below];
    const double y1 = spectrum.psd[above];
    const double f0 = spectrum.freq[below];
    const double f1 = spectrum.freq[above];
    return f0 + (half - y0) / (y1 - y0) * (f1 - f0);
  };
  const double half_width = crossing(right, right - 1) - crossing(left, left + 1);

  // Any other excursion above half maximum away from the main lobe means the
  // spectrum does not have a single dominant peak.
  const Eigen::Index guard = right - left;
  for (Eigen::Index i = 0; i < size; ++i) {
    if (i >= left - guard && i <= right + guard) continue;
    if (spectrum.psd[i] > half)
      throw NumericalError("fit_lorentzian_fwhm: more than one peak above half maximum");
  }

  LorentzianFit fit;
  fit.points_above_half = static_cast<int>(right - left - 1);
  if (fit.points_above_half < 10) {
    if (half_width <= 3.0 * spectrum.bin_width) {
      fit.f_center = spectrum.freq[peak];
      fit.fwhm = half_width;
      fit.amplitude = peak_value - floor;
      fit.floor = floor;
      fit.resolution_limited = true;
      return fit;
    }
    throw NumericalError("fit_lorentzian_fwhm: fewer than 10 points above half maximum");
  }

  // Fit in units of bins around the peak and of the peak height.
  const double f_ref = spectrum.freq[peak];
  const double df = spectrum.bin_width;
  const Eigen::Index span = std::max<Eigen::Index>(8 * (right - left), 20);
  const Eigen::Index lo = std::max<Eigen::Index>(0, peak - span);
  const Eigen::Index hi = std::min<Eigen::Index>(size - 1, peak + span);
  const Eigen::VectorXd x = ((spectrum.freq.segment(lo, hi - lo + 1).array() - f_ref) / df).matrix();
  const Eigen::VectorXd y = spectrum.psd.segment(lo, hi - lo + 1) / peak_value;

  LorentzianResidual functor(x, y);
  Eigen::LevenbergMarquardt<LorentzianResidual> lm(functor);
  Eigen::VectorXd p(4);
  p << (peak_value - floor) / peak_value, 0.0, half_width / df, floor / peak_value;
  const auto status = lm.minimize(p);
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status == ImproperInputParameters || status == TooManyFunctionEvaluation || status == UserAsked ||
      !p.allFinite() || !(std::abs(p[2]) > 0.0)) {
    std::ostringstream msg;
    msg << "fit_lorentzian_fwhm: least-squares fit failed (status " << static_cast<int>(status) << ")";
    throw NumericalError(msg.str());
  }

  Eigen::VectorXd residual(x.size());
  functor(p, residual);
  fit.amplitude = p[0] * peak_value;
  fit.f_center = f_ref + p[1] * df;
  fit.fwhm = std::abs(p[2]) * df;
  fit.floor = p[3] * peak_value;
  fit.residual = std::sqrt(residual.squaredNorm() / static_cast<double>(x.size())) / std::abs(p[0]);
  fit.resolution_limited = fit.fwhm < 2.0 * spectrum.resolution_bandwidth;
  return fit;
}

double transport_velocity(double delta_t) { return delta_t * PhysicalConstants::lambda_813; }

DopplerShift doppler_difference(double v_t, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
  return {2.0 * v_t / lambda, std::abs(v_t) > kDopplerValidVelocity};
}

void write_csv(std::ostream& os, const Spectrum& spectrum) {
  write_csv_header(os, {"freq_hz", "psd"});
  for (Eigen::Index i = 0; i < spectrum.freq.size(); ++i)
    os << format_number(spectrum.freq[i]) << ',' << format_number(spectrum.psd[i]) << '\n';
}

void write_field(std::ostream& os, const FieldTrace& trace) {
  os << format_number(trace.sample_rate) << ' ' << format_number(trace.f0) << ' ' << trace.samples.size() << '\n';
  std::vector<float> interleaved(static_cast<std::size_t>(2 * trace.samples.size()));
  for (Eigen::Index i = 0; i < trace.samples.size(); ++i) {
    interleaved[2 * i] = to_little_endian(static_cast<float>(trace.samples[i].real()));
    interleaved[2 * i + 1] = to_little_endian(static_cast<float>(trace.samples[i].imag()));
  }
  os.write(reinterpret_cast<const char*>(interleaved.data()),
           static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (!os) throw IoError("failed writing field trace");
}

FieldTrace read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open field trace '" + path.string() + "'");
  std::string header;
  if (!std::getline(is, header)) throw ParseError("missing header", 1);
  std::istringstream hs(header);
  std::string rate_token, f0_token;
  long long length = -1;
  hs >> rate_token >> f0_token >> length;
  const auto rate = parse_number(rate_token);
  const auto f0 = parse_number(f0_token);
  if (!rate || !f0 || length < 0 || !(*rate > 0.0))
    throw ParseError("header must read 'sample_rate f0 length'", 1);

  std::vector<float> interleaved(static_cast<std::size_t>(2 * length));
  is.read(reinterpret_cast<char*>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (is.gcount() != static_cast<std::streamsize>(interleaved.size() * sizeof(float)))
    throw ParseError("field trace shorter than its header length", 1);

  FieldTrace trace;
  trace.sample_rate = *rate;
  trace.f0 = *f0;
  trace.samples.resize(length);
  for (long long i = 0; i < length; ++i)
    trace.samples[i] = {to_little_endian(interleaved[2 * i]), to_little_endian(interleaved[2 * i + 1])};
  return trace;
}

}  // namespace recoil
