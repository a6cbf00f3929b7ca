#include "support.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>

#include <httplib.h>
#include <jpeglib.h>
#include <png.h>

#include "forensight/crypto.hpp"

namespace testing {

using nlohmann::json;

TempDir::TempDir() {
  auto base = std::filesystem::temp_directory_path();
  path_ = base / ("forensight-test-" + forensight::crypto::new_id());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

namespace {

Bytes encode_png(int width, int height, std::uint32_t format, const std::vector<std::uint8_t>& pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error("png sizing failed");
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error("png write failed");
  }
  out.resize(size);
  return out;
}

void put_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(Bytes& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

}  // namespace

Bytes encode_png_gray(int width, int height, const std::vector<std::uint8_t>& pixels) {
  return encode_png(width, height, PNG_FORMAT_GRAY, pixels);
}

Bytes encode_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb) {
  return encode_png(width, height, PNG_FORMAT_RGB, rgb);
}

Bytes encode_jpeg_gray(int width, int height, const std::vector<std::uint8_t>& pixels, int quality) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * width);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  Bytes out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

Bytes encode_wav_raw(std::uint16_t format_tag, std::uint16_t channels, std::uint32_t sample_rate,
                     std::uint16_t bits, const Bytes& data) {
  Bytes b;
  put_tag(b, "RIFF");
  put_u32(b, static_cast<std::uint32_t>(4 + 8 + 16 + 8 + data.size()));
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, format_tag);
  put_u16(b, channels);
  put_u32(b, sample_rate);
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  put_u32(b, sample_rate * block_align);
  put_u16(b, block_align);
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, static_cast<std::uint32_t>(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  return b;
}

Bytes encode_wav_pcm16(const std::vector<std::int16_t>& interleaved, int channels, int sample_rate) {
  Bytes data;
  data.reserve(interleaved.size() * 2);
  for (auto s : interleaved) put_u16(data, static_cast<std::uint16_t>(s));
  return encode_wav_raw(1, static_cast<std::uint16_t>(channels), static_cast<std::uint32_t>(sample_rate), 16, data);
}

Bytes fake_avif() {
  Bytes b = {0x00, 0x00, 0x00, 0x1C, 'f', 't', 'y', 'p', 'a', 'v', 'i', 'f', 0x00, 0x00, 0x00, 0x00,
             'a',  'v',  'i',  'f',  'm', 'i', 'f', '1', 'm', 'i', 'a', 'f'};
  b.resize(256, 0);
  return b;
}

Bytes fake_mp3() {
  Bytes b = {'I', 'D', '3', 0x04, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xFF, 0xFB, 0x90, 0x64};
  b.resize(512, 0);
  return b;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

StubServer::StubServer() : server_(std::make_unique<httplib::Server>()) {
  server_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  server_->Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
    Handler handler;
    auto body = json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(mutex_);
      requests_[req.path].push_back(body);
      const auto it = handlers_.find(req.path);
      if (it != handlers_.end()) handler = it->second;
    }
    if (!handler) {
      res.status = 404;
      return;
    }
    handler(body, res);
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ < 0) throw std::runtime_error("stub bind failed");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubServer::~StubServer() { pause(); }

void StubServer::pause() {
  if (!thread_.joinable()) return;
  server_->stop();
  thread_.join();
}

void StubServer::resume() {
  if (thread_.joinable()) return;
  if (!server_->bind_to_port("127.0.0.1", port_)) throw std::runtime_error("stub rebind failed");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void StubServer::on(const std::string& path, Handler handler) {
  std::lock_guard lock(mutex_);
  handlers_[path] = std::move(handler);
}

std::string StubServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::vector<json> StubServer::requests(const std::string& path) const {
  std::lock_guard lock(mutex_);
  const auto it = requests_.find(path);
  return it == requests_.end() ? std::vector<json>{} : it->second;
}

std::size_t StubServer::count(const std::string& path) const { return requests(path).size(); }

void StubServer::clear() {
  std::lock_guard lock(mutex_);
  requests_.clear();
}

void reply_json(httplib::Response& res, const json& body, int status) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

forensight::ServiceConfig test_config(const TempDir& dir) {
  forensight::ServiceConfig c;
  c.store_url = "sqlite://" + (dir / "store.db").string();
  c.blob_root = (dir / "blobs").string();
  c.token_key = "test-token-key";
  c.feedback_salt = "test-salt";
  c.bcrypt_cost = 4;
  c.admin_emails = {"admin@example.org"};
  c.adapter_timeout = std::chrono::milliseconds(2000);
  return c;
}

forensight::Registration registration(const std::string& email, const std::string& region) {
  return {"Test User", email, "analyst", region, "passw0rd!", "passw0rd!"};
}

TestUser make_user(forensight::Platform& platform, const std::string& email, const std::string& region) {
  const auto user = platform.accounts().register_user(registration(email, region));
  return {user.user_id, user.email, platform.accounts().login(email, "passw0rd!")};
}

Bytes checkerboard_png(int n) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) px[static_cast<std::size_t>(r) * n + c] = ((r + c) % 2) ? 255 : 0;
  return encode_png_gray(n, n, px);
}

Bytes constant_png(int n, std::uint8_t value) {
  return encode_png_gray(n, n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, value));
}

Bytes sine_wav(double hz, int sample_rate, int samples) {
  std::vector<std::int16_t> pcm(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    pcm[static_cast<std::size_t>(i)] =
        static_cast<std::int16_t>(std::lround(16000.0 * std::sin(2 * M_PI * hz * i / sample_rate)));
  }
  return encode_wav_pcm16(pcm, 1, sample_rate);
}

}  // namespace testing
