#include "forensight/native_detectors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <numbers>

#include "forensight/error.hpp"

namespace forensight {

namespace {

// FFTW's planner is not re-entrant; fftw_execute is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!data) throw std::bad_alloc();
  }
  FftwBuffer(const FftwBuffer&) = delete;
  ~FftwBuffer() { fftw_free(data); }
  T* data;
};

class Plan {
 public:
  explicit Plan(fftw_plan plan) : plan_(plan) {
    if (!plan_) throw Error(ErrorCode::internal, "fftw planning failed");
  }
  Plan(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

std::vector<double> spectrum_of(const std::vector<double>& plane, int height, int width, double offset) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  FftwBuffer<fftw_complex> in(n);
  FftwBuffer<fftw_complex> out(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_2d(height, width, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE));
  }
  for (std::size_t i = 0; i < n; ++i) {
    in.data[i][0] = plane[i] - offset;
    in.data[i][1] = 0.0;
  }
  plan->execute();
  std::vector<double> power(n);
  for (std::size_t i = 0; i < n; ++i) {
    power[i] = out.data[i][0] * out.data[i][0] + out.data[i][1] * out.data[i][1];
  }
  return power;
}

void check_image(const DecodedImage& image) {
  if (image.width < 1 || image.height < 1 ||
      image.luma.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::decode_failure, "image plane has inconsistent dimensions");
  }
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

double logistic(double x, double steepness, double midpoint) {
  return 1.0 / (1.0 + std::exp(-steepness * (x - midpoint)));
}

std::vector<double> power_spectrum(const DecodedImage& image) {
  check_image(image);
  return spectrum_of(image.luma, image.height, image.width, 0.0);
}

double radial_frequency(int u, int v, int height, int width) {
  const double fu = static_cast<double>(std::min(u, height - u)) / height;
  const double fv = static_cast<double>(std::min(v, width - v)) / width;
  return std::sqrt(fu * fu + fv * fv);
}

double high_frequency_ratio(const DecodedImage& image, double radial_cutoff) {
  check_image(image);
  const auto [lo, hi] = std::minmax_element(image.luma.begin(), image.luma.end());
  if (*lo == *hi) return 0.0;  // non-DC power is exactly zero

  // Removing the mean only touches the DC bin, which is excluded anyway.
  double mean = 0.0;
  for (double y : image.luma) mean += y;
  mean /= static_cast<double>(image.luma.size());
  const auto power = spectrum_of(image.luma, image.height, image.width, mean);

  double high = 0.0;
  double total = 0.0;
  for (int u = 0; u < image.height; ++u) {
    for (int v = 0; v < image.width; ++v) {
      if (u == 0 && v == 0) continue;
      const double p = power[static_cast<std::size_t>(u) * image.width + v];
      total += p;
      if (radial_frequency(u, v, image.height, image.width) > radial_cutoff) high += p;
    }
  }
  return total > 0.0 ? high / total : 0.0;
}

DetectionResult run_native_frequency_detector(const DecodedImage& image,
                                              const FrequencyDetectorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const double r = high_frequency_ratio(image, config.radial_cutoff);
  const double score = logistic(r, config.steepness, config.midpoint);
  return DetectionResult{label_for(score), score, std::nullopt, elapsed_ms(start)};
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

std::vector<double> frame_flatness(const DecodedAudio& audio, const AudioDetectorConfig& config) {
  const std::size_t n = config.frame_size;
  if (n == 0 || config.hop == 0) throw Error(ErrorCode::invalid_config, "frame and hop must be positive");
  if (audio.samples.size() < n) {
    throw Error(ErrorCode::too_short, "need at least " + std::to_string(n) + " samples");
  }
  const std::size_t bins = n / 2 + 1;
  const std::size_t frames = (audio.samples.size() - n) / config.hop + 1;
  const auto window = hann_window(n);

  FftwBuffer<double> in(n);
  FftwBuffer<fftw_complex> out(bins);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data, out.data, FFTW_ESTIMATE));
  }

  std::vector<double> flatness(frames);
  const long double eps = config.epsilon;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t offset = f * config.hop;
    for (std::size_t i = 0; i < n; ++i) in.data[i] = audio.samples[offset + i] * window[i];
    plan->execute();
    // Extended precision keeps flat spectra (e.g. silence) at exactly 1.
    long double log_sum = 0.0L;
    long double power_sum = 0.0L;
    for (std::size_t k = 0; k < bins; ++k) {
      const long double p = static_cast<long double>(out.data[k][0]) * out.data[k][0] +
                            static_cast<long double>(out.data[k][1]) * out.data[k][1];
      log_sum += std::log(p + eps);
      power_sum += p;
    }
    const long double count = static_cast<long double>(bins);
    flatness[f] = static_cast<double>(std::exp(log_sum / count - std::log(power_sum / count + eps)));
  }
  return flatness;
}

DetectionResult run_native_audio_detector(const DecodedAudio& audio, const AudioDetectorConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto flatness = frame_flatness(audio, config);
  double mean = 0.0;
  for (double f : flatness) mean += f;
  mean /= static_cast<double>(flatness.size());
  const double score = logistic(mean, config.steepness, config.midpoint);
  return DetectionResult{label_for(score), score, std::nullopt, elapsed_ms(start)};
}

}  // namespace forensight
