#pragma once

#include <random>

#include "rio/chirp.hpp"
#include "rio/geometry.hpp"

namespace rio::test {

inline ChirpConfig small_config() {
  ChirpConfig cfg;
  cfg.num_chirps = 16;
  cfg.num_tx = 3;
  cfg.num_rx = 4;
  cfg.num_samples = 32;
  cfg.range_resolution = 0.35;
  cfg.max_range = 0.35 * 32;
  cfg.doppler_resolution = 0.15;
  cfg.max_doppler = 0.15 * 16 / 2;
  cfg.validate();
  return cfg;
}

/// Paper-style indoor configuration: max Doppler 1.2 m/s, max range 11.2 m.
inline ChirpConfig indoor_config() {
  ChirpConfig cfg;  // defaults already encode the indoor bounds
  cfg.validate();
  return cfg;
}

inline RawFrame random_frame(const ChirpConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RawFrame f;
  f.iq = Tensor4<Complex>(cfg.num_chirps, cfg.num_tx, cfg.num_rx, cfg.num_samples);
  for (Index i = 0; i < f.iq.size(); ++i) {
    f.iq.data()[i] = Complex(gauss(rng), gauss(rng));
  }
  return f;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v(gauss(rng), gauss(rng), gauss(rng));
  return v.normalized();
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  return so3_exp(angle(rng) * random_unit(rng));
}

}  // namespace rio::test
