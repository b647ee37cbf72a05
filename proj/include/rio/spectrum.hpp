#pragma once

#include "rio/chirp.hpp"
#include "rio/core.hpp"

namespace rio {

/// Bin-to-physical-unit maps for a processed cube. Doppler, elevation and
/// azimuth axes are FFT-shifted (zero at the center bin); range is not.
struct CubeAxes {
  Index num_doppler = 0;
  Index num_elevation = 0;
  Index num_azimuth = 0;
  Index num_range = 0;
  double doppler_resolution = 0;
  double range_resolution = 0;
  double antenna_spacing = 0.5;

  double doppler(Index bin) const {
    return (static_cast<double>(bin) - static_cast<double>(num_doppler / 2)) * doppler_resolution;
  }
  double range(Index bin) const { return static_cast<double>(bin) * range_resolution; }

  /// Spatial frequency of a shifted angular bin, zero-centered over [-pi, pi).
  static double psi(Index bin, Index n) {
    return 2.0 * M_PI * (static_cast<double>(bin) - static_cast<double>(n / 2)) /
           static_cast<double>(n);
  }
  double psi_elevation(Index bin) const { return psi(bin, num_elevation); }
  double psi_azimuth(Index bin) const { return psi(bin, num_azimuth); }
};

/// 4-D spectrum (doppler, elevation, azimuth, range).
struct SpectralCube {
  double timestamp = 0;
  Tensor4<Complex> bins;
  CubeAxes axes;
};

/// Intermediate after range and Doppler FFTs, still in channel domain:
/// (doppler, tx, rx, range). Doppler axis is already FFT-shifted.
struct ChannelSpectrum {
  double timestamp = 0;
  Tensor4<Complex> bins;
};

/// Three-channel real encoding of a cube: per bin r e^{j theta} the planes
/// hold log10(max(r, floor)), sin(theta), cos(theta).
struct FeatureCube {
  Tensor4<double> log_magnitude;
  Tensor4<double> sin_phase;
  Tensor4<double> cos_phase;
};

struct SpectrumWindowing {
  bool hann_range = false;
  bool hann_doppler = false;
};

/// Removes per-(tx, rx, sample) mean along the slow-time (chirp) axis.
RawFrame dc_remove(const RawFrame& frame);

/// Range FFT over fast-time and shifted Doppler FFT over slow-time.
ChannelSpectrum range_doppler_fft(const RawFrame& frame, const ChirpConfig& cfg,
                                  const SpectrumWindowing& win = {});

/// Zero-padded, shifted elevation/azimuth FFT of the virtual array at one
/// (doppler, range) cell. Rows are elevation bins, columns azimuth bins.
Eigen::MatrixXcd angle_image(const ChannelSpectrum& ch, const ChirpConfig& cfg,
                             const AngularPadding& pad, Index doppler_bin, Index range_bin);

/// Full 4-D transform: range, Doppler, then angular FFTs at every cell.
SpectralCube process_frame(const RawFrame& frame, const ChirpConfig& cfg,
                           const AngularPadding& pad, const SpectrumWindowing& win = {});

FeatureCube encode(const SpectralCube& cube, double mag_floor = 1e-12);

}  // namespace rio
