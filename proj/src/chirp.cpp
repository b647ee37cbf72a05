#include "rio/chirp.hpp"

#include <algorithm>

namespace rio {

std::vector<VirtualElement> ChirpConfig::default_layout(int num_tx, int num_rx) {
  std::vector<VirtualElement> layout(static_cast<size_t>(num_tx * num_rx));
  if (num_tx == 3) {
    // 2 x (2*num_rx) grid: TX0 | TX2 along azimuth, TX1 elevated and centered.
    for (int rx = 0; rx < num_rx; ++rx) {
      layout[static_cast<size_t>(0 * num_rx + rx)] = {0, rx};
      layout[static_cast<size_t>(2 * num_rx + rx)] = {0, num_rx + rx};
      layout[static_cast<size_t>(1 * num_rx + rx)] = {1, num_rx / 2 + rx};
    }
  } else {
    for (int tx = 0; tx < num_tx; ++tx) {
      for (int rx = 0; rx < num_rx; ++rx) {
        layout[static_cast<size_t>(tx * num_rx + rx)] = {0, tx * num_rx + rx};
      }
    }
  }
  return layout;
}

int ChirpConfig::layout_rows() const {
  int rows = 0;
  for (const auto& e : virtual_layout) rows = std::max(rows, e.row + 1);
  return rows;
}

int ChirpConfig::layout_cols() const {
  int cols = 0;
  for (const auto& e : virtual_layout) cols = std::max(cols, e.col + 1);
  return cols;
}

void ChirpConfig::validate() {
  if (num_chirps < 1 || num_tx < 1 || num_rx < 1 || num_samples < 1) {
    fail("config", "antenna/chirp/sample counts must be >= 1");
  }
  if (antenna_spacing <= 0) {
    fail("config", "antenna spacing must be positive");
  }
  if (range_resolution <= 0 || doppler_resolution <= 0) {
    fail("config", "range/doppler resolution must be positive");
  }
  const double want_range = range_resolution * num_samples;
  if (std::abs(max_range - want_range) > 1e-9 * std::max(1.0, want_range)) {
    fail("config", "max_range must equal range_resolution * num_samples");
  }
  const double want_doppler = doppler_resolution * num_chirps / 2.0;
  if (std::abs(max_doppler - want_doppler) > 1e-9 * std::max(1.0, want_doppler)) {
    fail("config", "max_doppler must equal doppler_resolution * num_chirps / 2");
  }
  if (virtual_layout.empty()) {
    virtual_layout = default_layout(num_tx, num_rx);
  }
  if (virtual_layout.size() != static_cast<size_t>(num_channels())) {
    fail("config", "virtual layout size must equal num_tx * num_rx");
  }
  for (const auto& e : virtual_layout) {
    if (e.row < 0 || e.col < 0) fail("config", "virtual layout indices must be >= 0");
  }
}

}  // namespace rio
