#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "forensight/config.hpp"
#include "forensight/platform.hpp"

namespace httplib {
class Server;
struct Response;
}  // namespace httplib

namespace testing {

using Bytes = std::vector<std::uint8_t>;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// 8-bit grey or RGB PNG via libpng's simplified writer.
Bytes encode_png_gray(int width, int height, const std::vector<std::uint8_t>& pixels);
Bytes encode_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb);
Bytes encode_jpeg_gray(int width, int height, const std::vector<std::uint8_t>& pixels, int quality = 95);

/// RIFF/WAVE with a canonical 16-byte fmt chunk.
Bytes encode_wav_pcm16(const std::vector<std::int16_t>& interleaved, int channels, int sample_rate);
/// Arbitrary fmt fields, for rejection tests.
Bytes encode_wav_raw(std::uint16_t format_tag, std::uint16_t channels, std::uint32_t sample_rate,
                     std::uint16_t bits, const Bytes& data);

/// Minimal but well-formed signatures for the formats without native codecs.
Bytes fake_avif();
Bytes fake_mp3();

Bytes read_file(const std::filesystem::path& path);

/// Tiny HTTP server on 127.0.0.1:<random>. Handlers can be swapped at any
/// time; every request body is recorded per path.
class StubServer {
 public:
  using Handler = std::function<void(const nlohmann::json& body, httplib::Response& res)>;

  StubServer();
  ~StubServer();

  void on(const std::string& path, Handler handler);
  std::string url() const;
  std::vector<nlohmann::json> requests(const std::string& path) const;
  std::size_t count(const std::string& path) const;
  void clear();
  /// Closes the listening socket so connections are refused.
  void pause();
  /// Listens again on the same port.
  void resume();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::map<std::string, Handler> handlers_;
  std::map<std::string, std::vector<nlohmann::json>> requests_;
};

void reply_json(httplib::Response& res, const nlohmann::json& body, int status = 200);

/// Config with a fresh store and blob root under dir; bcrypt cost 4.
forensight::ServiceConfig test_config(const TempDir& dir);

struct TestUser {
  std::string user_id;
  std::string email;
  std::string token;
};

forensight::Registration registration(const std::string& email, const std::string& region = "US");

TestUser make_user(forensight::Platform& platform, const std::string& email, const std::string& region = "US");

/// Deterministic white-noise image / tone bytes for upload tests.
Bytes checkerboard_png(int n = 8);
Bytes constant_png(int n = 8, std::uint8_t value = 128);
Bytes sine_wav(double hz, int sample_rate, int samples);

}  // namespace testing
