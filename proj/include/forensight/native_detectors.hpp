#pragma once

#include <cmath>
#include <vector>

#include "forensight/detectors.hpp"
#include "forensight/media.hpp"

namespace forensight {

/// 1 / (1 + exp(-steepness * (x - midpoint)))
double logistic(double x, double steepness, double midpoint);

// Spectral-energy heuristic for images. A demo-grade stand-in for the
// frequency-based detector family, not a trained model.
struct FrequencyDetectorConfig {
  double radial_cutoff = 0.25 * std::sqrt(0.5);
  double steepness = 10.0;
  double midpoint = 0.5;
};

/// |F(u,v)|^2 of the unnormalised 2-D DFT of the luma plane, row-major
/// (u over rows, v over columns), DC included.
std::vector<double> power_spectrum(const DecodedImage& image);

/// Normalised radial frequency of bin (u,v) in an H x W spectrum.
double radial_frequency(int u, int v, int height, int width);

/// Fraction of non-DC power whose radial frequency exceeds the cutoff; 0 for
/// a constant image.
double high_frequency_ratio(const DecodedImage& image, double radial_cutoff);

DetectionResult run_native_frequency_detector(const DecodedImage& image,
                                              const FrequencyDetectorConfig& config = {});

// Spectral-flatness heuristic for audio.
struct AudioDetectorConfig {
  std::size_t frame_size = 1024;
  std::size_t hop = 512;
  double epsilon = 1e-12;
  double steepness = 8.0;
  double midpoint = 0.3;
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Per-frame flatness exp(mean ln(P+eps)) / (mean P + eps) over the
/// one-sided power spectrum of each Hann-windowed frame. Throws too_short
/// when fewer than frame_size samples are available.
std::vector<double> frame_flatness(const DecodedAudio& audio, const AudioDetectorConfig& config = {});

DetectionResult run_native_audio_detector(const DecodedAudio& audio,
                                          const AudioDetectorConfig& config = {});

}  // namespace forensight
