#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "forensight/error.hpp"
#include "forensight/native_detectors.hpp"
#include "oracles.hpp"

using namespace forensight;

namespace {

DecodedImage random_image(std::mt19937_64& rng, int h, int w) {
  DecodedImage img{w, h, std::vector<double>(static_cast<std::size_t>(w * h))};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : img.luma) v = u(rng);
  return img;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("logistic closed forms") {
  CHECK(logistic(0.0, 10, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(5.0))).epsilon(1e-15));
  CHECK(logistic(1.0, 10, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(-5.0))).epsilon(1e-15));
  CHECK(logistic(0.3, 8, 0.3) == 0.5);
}

TEST_CASE("constant image scores 1/(1+e^5) and is real") {
  for (int n : {1, 2, 7, 16}) {
    for (double value : {0.0, 0.25, 1.0}) {
      DecodedImage img{n, n, std::vector<double>(static_cast<std::size_t>(n * n), value)};
      CHECK(high_frequency_ratio(img, FrequencyDetectorConfig{}.radial_cutoff) == 0.0);
      const auto r = run_native_frequency_detector(img);
      CHECK(std::abs(r.score - 1.0 / (1.0 + std::exp(5.0))) < 1e-9);
      CHECK(r.label == Label::real);
      CHECK_FALSE(r.faces);
    }
  }
}

TEST_CASE("8x8 checkerboard puts all power at Nyquist") {
  DecodedImage img{8, 8, std::vector<double>(64)};
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) img.luma[static_cast<std::size_t>(r * 8 + c)] = (r + c) % 2;
  const auto oracle = oracle::dft_power(img);
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      const double p = oracle[static_cast<std::size_t>(u * 8 + v)];
      if ((u == 0 && v == 0) || (u == 4 && v == 4)) {
        CHECK(p > 0);
      } else {
        CHECK(p < 1e-18);
      }
    }
  }
  CHECK(oracle::high_frequency_ratio(img, FrequencyDetectorConfig{}.radial_cutoff) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto result = run_native_frequency_detector(img);
  CHECK(std::abs(result.score - 1.0 / (1.0 + std::exp(-5.0))) < 1e-9);
  CHECK(result.label == Label::fake);
}

TEST_CASE("radial frequency folds at Nyquist") {
  CHECK(radial_frequency(0, 0, 8, 8) == 0.0);
  CHECK(radial_frequency(4, 4, 8, 8) == doctest::Approx(std::sqrt(0.5)));
  CHECK(radial_frequency(1, 0, 8, 8) == radial_frequency(7, 0, 8, 8));
  CHECK(radial_frequency(0, 3, 5, 6) == doctest::Approx(0.5));
}

TEST_CASE("spectrum and ratio match a brute-force DFT on random images") {
  std::mt19937_64 rng(424242);
  const double cutoff = FrequencyDetectorConfig{}.radial_cutoff;
  for (int trial = 0; trial < 25; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 32);
    const int w = 1 + static_cast<int>(rng() % 32);
    CAPTURE(h);
    CAPTURE(w);
    const auto img = random_image(rng, h, w);
    const auto fast = power_spectrum(img);
    const auto slow = oracle::dft_power(img);
    REQUIRE(fast.size() == slow.size());
    double peak = 0;
    for (double p : slow) peak = std::max(peak, p);
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-9 * peak);

    const double r_fast = high_frequency_ratio(img, cutoff);
    const double r_slow = oracle::high_frequency_ratio(img, cutoff);
    CHECK(relative_error(r_fast, r_slow) < 1e-9);

    // Parseval: sum |F|^2 / (HW) == sum |x|^2.
    double energy = 0;
    for (double v : img.luma) energy += v * v;
    double spectral = 0;
    for (double p : fast) spectral += p;
    CHECK(relative_error(spectral / (h * w), energy) < 1e-9);
  }
}

TEST_CASE("adding a constant to luma leaves the score unchanged") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto img = random_image(rng, 12 + trial, 9 + trial);
    for (auto& v : img.luma) v *= 0.5;
    auto shifted = img;
    for (auto& v : shifted.luma) v += 0.37;
    CHECK(std::abs(run_native_frequency_detector(img).score - run_native_frequency_detector(shifted).score) < 1e-9);
  }
}

TEST_CASE("ratio grows with the weight of high-frequency content") {
  const int n = 16;
  const double cutoff = FrequencyDetectorConfig{}.radial_cutoff;
  double previous = -1;
  for (int step = 0; step <= 10; ++step) {
    const double weight = step / 10.0;
    DecodedImage img{n, n, std::vector<double>(static_cast<std::size_t>(n * n))};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double low = std::cos(2 * M_PI * 1 * c / n);
        const double high = std::cos(2 * M_PI * 6 * r / n + 2 * M_PI * 5 * c / n);
        img.luma[static_cast<std::size_t>(r * n + c)] = 0.5 + 0.25 * ((1 - weight) * low + weight * high);
      }
    }
    const double r = high_frequency_ratio(img, cutoff);
    // Pure low-frequency content gives r at rounding level, so compare absolutely.
    CAPTURE(weight);
    CHECK(std::abs(r - oracle::high_frequency_ratio(img, cutoff)) < 1e-12);
    CHECK(r >= previous - 1e-12);
    previous = r;
  }
  CHECK(previous == doctest::Approx(1.0));
}

TEST_CASE("scores stay in [0,1] and labels follow the threshold") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto r = run_native_frequency_detector(random_image(rng, 1 + static_cast<int>(rng() % 24), 1 + static_cast<int>(rng() % 24)));
    CHECK(r.score >= 0.0);
    CHECK(r.score <= 1.0);
    CHECK((r.label == Label::fake) == (r.score >= 0.5));
  }
}

TEST_CASE("silence has flatness exactly 1") {
  DecodedAudio silence{16000, std::vector<double>(16000, 0.0)};
  const auto flat = frame_flatness(silence);
  CHECK(flat.size() == (16000 - 1024) / 512 + 1);
  for (double f : flat) CHECK(f == 1.0);
  const auto r = run_native_audio_detector(silence);
  CHECK(std::abs(r.score - 1.0 / (1.0 + std::exp(-5.6))) < 1e-12);
  CHECK(r.label == Label::fake);
}

TEST_CASE("a pure tone is flat-free and real") {
  DecodedAudio tone{16000, std::vector<double>(16000)};
  for (int i = 0; i < 16000; ++i) tone.samples[static_cast<std::size_t>(i)] = 0.5 * std::sin(2 * M_PI * 440 * i / 16000.0);
  const auto flat = frame_flatness(tone);
  const double mean = oracle::mean(flat);
  CHECK(mean < 0.05);
  const auto r = run_native_audio_detector(tone);
  CHECK(r.score < 0.15);
  CHECK(r.label == Label::real);
}

TEST_CASE("uniform noise is flat and fake") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DecodedAudio noise{16000, std::vector<double>(16000)};
  for (auto& s : noise.samples) s = u(rng);
  CHECK(oracle::mean(frame_flatness(noise)) > 0.5);
  CHECK(run_native_audio_detector(noise).label == Label::fake);
}

TEST_CASE("frame flatness matches a naive DFT recomputation") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    DecodedAudio audio{16000, std::vector<double>(1024 + 512 * (2 + trial) + 100)};
    for (std::size_t i = 0; i < audio.samples.size(); ++i) {
      audio.samples[i] = trial == 0 ? u(rng) : 0.3 * std::sin(0.05 * (trial + 1) * static_cast<double>(i)) + 0.01 * u(rng);
    }
    const auto fast = frame_flatness(audio);
    const auto slow = oracle::frame_flatness(audio.samples, 1024, 512, 1e-12);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t f = 0; f < fast.size(); ++f) CHECK(std::abs(fast[f] - slow[f]) < 1e-9);
  }
}

TEST_CASE("hann window is periodic") {
  const auto w = hann_window(8);
  CHECK(w[0] == 0.0);
  CHECK(w[4] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.5));
  CHECK(w[6] == doctest::Approx(0.5));
}

TEST_CASE("audio shorter than one frame is too short") {
  try {
    run_native_audio_detector(DecodedAudio{16000, std::vector<double>(1023, 0.1)});
    FAIL("expected too_short");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::too_short);
  }
  CHECK(frame_flatness(DecodedAudio{16000, std::vector<double>(1024, 0.0)}).size() == 1);
}
