#pragma once

#include "rio/core.hpp"

namespace rio {

/// Placement of one (tx, rx) pair on the virtual antenna grid, in units of
/// the element spacing. row = elevation axis, col = azimuth axis.
struct VirtualElement {
  int row = 0;
  int col = 0;
};

struct ChirpConfig {
  int num_chirps = 64;    // slow-time
  int num_tx = 3;
  int num_rx = 4;
  int num_samples = 64;   // fast-time per chirp

  double range_resolution = 0.175;    // m/bin, max_range = res * num_samples
  double max_range = 11.2;            // m
  double doppler_resolution = 0.0375; // (m/s)/bin, max_doppler = res * num_chirps / 2
  double max_doppler = 1.2;           // m/s
  double carrier_wavelength = 3.89e-3; // m
  double antenna_spacing = 0.5;       // element spacing in wavelengths
  double frame_rate = 20.0;           // Hz

  // Virtual array placement per (tx, rx), tx-major. Empty means the
  // AWR1843-style default built by validate()/layout().
  std::vector<VirtualElement> virtual_layout;

  int num_channels() const { return num_tx * num_rx; }

  const VirtualElement& element(int tx, int rx) const {
    return virtual_layout[static_cast<size_t>(tx * num_rx + rx)];
  }

  int layout_rows() const;
  int layout_cols() const;

  /// Checks invariants and fills the default virtual layout if unset.
  void validate();

  /// AWR1843-style placement: TX0 and TX2 fill azimuth row 0, TX1 sits on
  /// elevation row 1 offset into the middle. Falls back to a single-row
  /// uniform linear array for other antenna counts.
  static std::vector<VirtualElement> default_layout(int num_tx, int num_rx);
};

struct RawFrame {
  double timestamp = 0;
  Tensor4<Complex> iq;  // (num_chirps, num_tx, num_rx, num_samples)
};

struct AngularPadding {
  int elevation = 32;
  int azimuth = 64;
};

}  // namespace rio
