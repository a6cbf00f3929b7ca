#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forensight/clock.hpp"
#include "forensight/store.hpp"

namespace forensight {

using ByteView = std::span<const std::uint8_t>;

enum class Modality { image, audio };
enum class MediaFormat { png, jpeg, avif, wav, mp3 };

std::string_view to_string(Modality m);
std::string_view to_string(MediaFormat f);
std::optional<Modality> parse_modality(std::string_view text);
std::optional<MediaFormat> parse_format(std::string_view text);

constexpr Modality modality_of(MediaFormat f) {
  return (f == MediaFormat::wav || f == MediaFormat::mp3) ? Modality::audio : Modality::image;
}

/// Identifies the container from its leading signature bytes only; the file
/// name plays no part. Throws unsupported_format.
MediaFormat sniff_format(ByteView bytes);

struct MediaUpload {
  std::string upload_id;
  std::string user_id;
  std::string filename;
  Modality modality = Modality::image;
  MediaFormat format = MediaFormat::png;
  std::int64_t byte_size = 0;
  std::string content_hash;
  std::string storage_ref;
  bool consent = true;
  Micros uploaded_at = 0;
};

/// Row-major luma in [0,1].
struct DecodedImage {
  int width = 0;
  int height = 0;
  std::vector<double> luma;

  double at(int row, int col) const { return luma[static_cast<std::size_t>(row) * width + col]; }
};

/// Mono samples in [-1,1].
struct DecodedAudio {
  int sample_rate = 0;
  std::vector<double> samples;
};

/// PNG and JPEG only; AVIF raises undecodable_format. Luma uses BT.601
/// weights 0.299 R + 0.587 G + 0.114 B.
DecodedImage decode_image(ByteView bytes, MediaFormat format);

/// 16-bit PCM WAV only; channels are averaged and scaled by 1/32768.
DecodedAudio decode_audio(ByteView bytes, MediaFormat format);

/// Width and height from the PNG/JPEG header without decoding pixels.
std::optional<std::pair<int, int>> probe_image_size(ByteView bytes, MediaFormat format);

struct IngestLimits {
  std::int64_t image_bytes = 10 * 1024 * 1024;
  std::int64_t audio_bytes = 20 * 1024 * 1024;
};

/// Content-addressed blobs: <root>/<first two hex chars>/<sha256 hex>.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  /// Writes atomically (temp file + rename) and returns the storage ref.
  std::string put(ByteView bytes, const std::string& content_hash);
  std::vector<std::uint8_t> get(const std::string& storage_ref) const;
  std::filesystem::path path_of(const std::string& storage_ref) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

class MediaLibrary {
 public:
  MediaLibrary(Store& store, BlobStore& blobs, IngestLimits limits, Clock clock);

  /// Idempotent per (user_id, content_hash): a re-upload returns the
  /// existing record.
  MediaUpload ingest(const std::string& user_id, std::string_view filename, ByteView bytes,
                     bool consent);
  std::optional<MediaUpload> find(const std::string& upload_id);
  std::vector<std::uint8_t> load_bytes(const MediaUpload& upload) const;

  static std::optional<MediaUpload> find_in(Connection& c, const std::string& upload_id);

 private:
  Store& store_;
  BlobStore& blobs_;
  IngestLimits limits_;
  Clock clock_;
};

}  // namespace forensight
