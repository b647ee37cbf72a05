#include "rio/spectrum.hpp"

#include <unsupported/Eigen/FFT>

namespace rio {

namespace {

void check_frame(const RawFrame& frame, const ChirpConfig& cfg) {
  const auto& d = frame.iq.dims();
  if (d[0] != cfg.num_chirps || d[1] != cfg.num_tx || d[2] != cfg.num_rx ||
      d[3] != cfg.num_samples) {
    fail("shape-mismatch", "raw frame shape does not match chirp config");
  }
}

Eigen::VectorXcd fftshift(const Eigen::VectorXcd& x) {
  const Index n = x.size();
  Eigen::VectorXcd out(n);
  for (Index i = 0; i < n; ++i) out[i] = x[(i + n / 2) % n];
  return out;
}

void fft_forward(Eigen::FFT<double>& fft, Eigen::VectorXcd& dst,
                 const Eigen::VectorXcd& src) {
  if (src.size() == 1) {
    dst = src;  // length-1 transform is the identity
    return;
  }
  fft.fwd(dst, src);
}

Eigen::VectorXd hann(Index n) {
  Eigen::VectorXd w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (Index i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                 static_cast<double>(n - 1)));
  }
  return w;
}

}  // namespace

RawFrame dc_remove(const RawFrame& frame) {
  RawFrame out = frame;
  const auto& d = frame.iq.dims();
  const Index n_c = d[0];
  for (Index tx = 0; tx < d[1]; ++tx) {
    for (Index rx = 0; rx < d[2]; ++rx) {
      for (Index m = 0; m < d[3]; ++m) {
        Complex mean(0, 0);
        for (Index n = 0; n < n_c; ++n) mean += frame.iq(n, tx, rx, m);
        mean /= static_cast<double>(n_c);
        for (Index n = 0; n < n_c; ++n) out.iq(n, tx, rx, m) -= mean;
      }
    }
  }
  return out;
}

ChannelSpectrum range_doppler_fft(const RawFrame& frame, const ChirpConfig& cfg,
                                  const SpectrumWindowing& win) {
  check_frame(frame, cfg);
  const Index n_c = cfg.num_chirps;
  const Index n_r = cfg.num_samples;

  Eigen::FFT<double> fft;
  ChannelSpectrum out;
  out.timestamp = frame.timestamp;
  out.bins = Tensor4<Complex>(n_c, cfg.num_tx, cfg.num_rx, n_r);

  const Eigen::VectorXd w_range = win.hann_range ? hann(n_r) : Eigen::VectorXd::Ones(n_r);
  const Eigen::VectorXd w_doppler = win.hann_doppler ? hann(n_c) : Eigen::VectorXd::Ones(n_c);

  // Range FFT along fast-time.
  Eigen::VectorXcd lane(n_r), spec(n_r);
  for (Index n = 0; n < n_c; ++n) {
    for (Index tx = 0; tx < cfg.num_tx; ++tx) {
      for (Index rx = 0; rx < cfg.num_rx; ++rx) {
        for (Index m = 0; m < n_r; ++m) lane[m] = frame.iq(n, tx, rx, m) * w_range[m];
        fft_forward(fft, spec, lane);
        for (Index m = 0; m < n_r; ++m) out.bins(n, tx, rx, m) = spec[m];
      }
    }
  }

  // Doppler FFT along slow-time, shifted so the center bin is zero Doppler.
  Eigen::VectorXcd dlane(n_c), dspec(n_c);
  for (Index tx = 0; tx < cfg.num_tx; ++tx) {
    for (Index rx = 0; rx < cfg.num_rx; ++rx) {
      for (Index m = 0; m < n_r; ++m) {
        for (Index n = 0; n < n_c; ++n) dlane[n] = out.bins(n, tx, rx, m) * w_doppler[n];
        fft_forward(fft, dspec, dlane);
        dspec = fftshift(dspec);
        for (Index n = 0; n < n_c; ++n) out.bins(n, tx, rx, m) = dspec[n];
      }
    }
  }
  return out;
}

Eigen::MatrixXcd angle_image(const ChannelSpectrum& ch, const ChirpConfig& cfg,
                             const AngularPadding& pad, Index doppler_bin, Index range_bin) {
  if (pad.elevation < cfg.layout_rows() || pad.azimuth < cfg.layout_cols()) {
    fail("config", "angular padding smaller than virtual array extent");
  }
  const Index n_e = pad.elevation;
  const Index n_a = pad.azimuth;

  Eigen::MatrixXcd grid = Eigen::MatrixXcd::Zero(n_e, n_a);
  for (int tx = 0; tx < cfg.num_tx; ++tx) {
    for (int rx = 0; rx < cfg.num_rx; ++rx) {
      const VirtualElement& e = cfg.element(tx, rx);
      grid(e.row, e.col) += ch.bins(doppler_bin, tx, rx, range_bin);
    }
  }

  Eigen::FFT<double> fft;
  Eigen::VectorXcd lane, spec;
  // Elevation FFT down the columns.
  for (Index a = 0; a < n_a; ++a) {
    lane = grid.col(a);
    fft_forward(fft, spec, lane);
    grid.col(a) = fftshift(spec);
  }
  // Azimuth FFT across the rows.
  for (Index e = 0; e < n_e; ++e) {
    lane = grid.row(e).transpose();
    fft_forward(fft, spec, lane);
    grid.row(e) = fftshift(spec).transpose();
  }
  return grid;
}

SpectralCube process_frame(const RawFrame& frame, const ChirpConfig& cfg,
                           const AngularPadding& pad, const SpectrumWindowing& win) {
  const ChannelSpectrum ch = range_doppler_fft(frame, cfg, win);

  SpectralCube cube;
  cube.timestamp = frame.timestamp;
  cube.axes = CubeAxes{cfg.num_chirps,        pad.elevation,        pad.azimuth,
                       cfg.num_samples,       cfg.doppler_resolution, cfg.range_resolution,
                       cfg.antenna_spacing};
  cube.bins = Tensor4<Complex>(cfg.num_chirps, pad.elevation, pad.azimuth, cfg.num_samples);

  for (Index d = 0; d < cfg.num_chirps; ++d) {
    for (Index r = 0; r < cfg.num_samples; ++r) {
      const Eigen::MatrixXcd img = angle_image(ch, cfg, pad, d, r);
      for (Index e = 0; e < pad.elevation; ++e) {
        for (Index a = 0; a < pad.azimuth; ++a) {
          cube.bins(d, e, a, r) = img(e, a);
        }
      }
    }
  }
  return cube;
}

FeatureCube encode(const SpectralCube& cube, double mag_floor) {
  const auto& d = cube.bins.dims();
  FeatureCube out;
  out.log_magnitude = Tensor4<double>(d[0], d[1], d[2], d[3]);
  out.sin_phase = Tensor4<double>(d[0], d[1], d[2], d[3]);
  out.cos_phase = Tensor4<double>(d[0], d[1], d[2], d[3]);

  const Complex* src = cube.bins.data();
  double* lm = out.log_magnitude.data();
  double* sp = out.sin_phase.data();
  double* cp = out.cos_phase.data();
  const Index n = cube.bins.size();
  for (Index i = 0; i < n; ++i) {
    const double r = std::abs(src[i]);
    lm[i] = std::log10(std::max(r, mag_floor));
    if (r == 0.0) {
      sp[i] = 0.0;
      cp[i] = 1.0;
    } else {
      sp[i] = src[i].imag() / r;
      cp[i] = src[i].real() / r;
    }
  }
  return out;
}

}  // namespace rio
