#include "forensight/media.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <fstream>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

bool starts_with(ByteView bytes, std::size_t offset, std::string_view sig) {
  return bytes.size() >= offset + sig.size() &&
         std::memcmp(bytes.data() + offset, sig.data(), sig.size()) == 0;
}

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

// BT.601 weights in integer thousandths keep white at exactly 1.0.
double luma_of(unsigned r, unsigned g, unsigned b) {
  const double y = static_cast<double>(299u * r + 587u * g + 114u * b) / (1000.0 * 255.0);
  return std::clamp(y, 0.0, 1.0);
}

DecodedImage decode_png(ByteView bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::decode_failure, "png: " + why);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::decode_failure, "png: " + why);
  }
  DecodedImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.luma.resize(static_cast<std::size_t>(out.width) * out.height);
  for (std::size_t i = 0; i < out.luma.size(); ++i) {
    out.luma[i] = luma_of(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_quiet(j_common_ptr, int) {}

// No C++ objects with destructors are live between setjmp and any longjmp in
// these two functions apart from ones constructed before setjmp.
DecodedImage decode_jpeg(ByteView bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_quiet;
  DecodedImage out;
  std::vector<std::uint8_t> row;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::decode_failure, std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.luma.resize(static_cast<std::size_t>(out.width) * out.height);
  row.resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_components);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rows[1] = {row.data()};
    const auto y = cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (int x = 0; x < out.width; ++x) {
      out.luma[static_cast<std::size_t>(y) * out.width + x] =
          luma_of(row[3 * x], row[3 * x + 1], row[3 * x + 2]);
    }
  }
  jpeg_finish_decompress(&cinfo);
  const long warnings = err.base.num_warnings;
  jpeg_destroy_decompress(&cinfo);
  // libjpeg pads truncated or corrupt streams with grey and only warns.
  if (warnings > 0) throw Error(ErrorCode::decode_failure, "jpeg: corrupt or truncated data");
  return out;
}

std::optional<std::pair<int, int>> probe_jpeg(ByteView bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_quiet;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return std::nullopt;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const std::pair<int, int> size{static_cast<int>(cinfo.image_width),
                                 static_cast<int>(cinfo.image_height)};
  jpeg_destroy_decompress(&cinfo);
  return size;
}

}  // namespace

std::string_view to_string(Modality m) { return m == Modality::image ? "image" : "audio"; }

std::string_view to_string(MediaFormat f) {
  switch (f) {
    case MediaFormat::png: return "png";
    case MediaFormat::jpeg: return "jpeg";
    case MediaFormat::avif: return "avif";
    case MediaFormat::wav: return "wav";
    case MediaFormat::mp3: return "mp3";
  }
  return "png";
}

std::optional<Modality> parse_modality(std::string_view text) {
  if (text == "image") return Modality::image;
  if (text == "audio") return Modality::audio;
  return std::nullopt;
}

std::optional<MediaFormat> parse_format(std::string_view text) {
  for (auto f : {MediaFormat::png, MediaFormat::jpeg, MediaFormat::avif, MediaFormat::wav,
                 MediaFormat::mp3}) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

MediaFormat sniff_format(ByteView bytes) {
  if (starts_with(bytes, 0, "\x89PNG\r\n\x1a\n")) return MediaFormat::png;
  if (starts_with(bytes, 0, "\xFF\xD8\xFF")) return MediaFormat::jpeg;
  if (starts_with(bytes, 4, "ftypavif")) return MediaFormat::avif;
  if (starts_with(bytes, 0, "RIFF") && starts_with(bytes, 8, "WAVE")) return MediaFormat::wav;
  if (starts_with(bytes, 0, "ID3")) return MediaFormat::mp3;
  if (bytes.size() >= 2 && bytes[0] == 0xFF && (bytes[1] & 0xE0) == 0xE0) return MediaFormat::mp3;
  throw Error(ErrorCode::unsupported_format,
              "accepted formats are png, jpeg, avif, wav and mp3");
}

DecodedImage decode_image(ByteView bytes, MediaFormat format) {
  switch (format) {
    case MediaFormat::png: return decode_png(bytes);
    case MediaFormat::jpeg: return decode_jpeg(bytes);
    case MediaFormat::avif:
      throw Error(ErrorCode::undecodable_format, "avif is stored and forwarded but not decoded natively");
    default:
      throw Error(ErrorCode::undecodable_format, "not an image format");
  }
}

DecodedAudio decode_audio(ByteView bytes, MediaFormat format) {
  if (format == MediaFormat::mp3) {
    throw Error(ErrorCode::undecodable_format, "mp3 is stored and forwarded but not decoded natively");
  }
  if (format != MediaFormat::wav) throw Error(ErrorCode::undecodable_format, "not an audio format");
  if (!starts_with(bytes, 0, "RIFF") || !starts_with(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::decode_failure, "wav: missing RIFF/WAVE header");
  }

  std::optional<std::uint16_t> audio_format;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
  std::uint32_t sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) throw Error(ErrorCode::decode_failure, "wav: truncated chunk");

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::decode_failure, "wav: short fmt chunk");
      const auto* f = bytes.data() + body;
      audio_format = le16(f);
      channels = le16(f + 2);
      sample_rate = le32(f + 4);
      block_align = le16(f + 12);
      bits = le16(f + 14);
      if (*audio_format == 0xFFFE && size >= 40) audio_format = le16(f + 24);  // extensible
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!audio_format) throw Error(ErrorCode::decode_failure, "wav: data before fmt");
      if (*audio_format != 1 || bits != 16) {
        throw Error(ErrorCode::undecodable_format,
                    "wav: only 16-bit PCM is decoded natively (format " +
                        std::to_string(*audio_format) + ", " + std::to_string(bits) + " bits)");
      }
      if (channels == 0 || sample_rate == 0 || block_align != channels * 2) {
        throw Error(ErrorCode::decode_failure, "wav: inconsistent fmt chunk");
      }
      DecodedAudio out;
      out.sample_rate = static_cast<int>(sample_rate);
      const std::size_t frames = size / block_align;
      out.samples.resize(frames);
      const auto* d = bytes.data() + body;
      for (std::size_t i = 0; i < frames; ++i) {
        double sum = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
          sum += static_cast<std::int16_t>(le16(d + (i * channels + ch) * 2));
        }
        out.samples[i] = std::clamp(sum / (channels * 32768.0), -1.0, 1.0);
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(ErrorCode::decode_failure, "wav: no data chunk");
}

std::optional<std::pair<int, int>> probe_image_size(ByteView bytes, MediaFormat format) {
  if (format == MediaFormat::png) {
    if (bytes.size() < 24 || !starts_with(bytes, 12, "IHDR")) return std::nullopt;
    return std::pair{static_cast<int>(be32(bytes.data() + 16)), static_cast<int>(be32(bytes.data() + 20))};
  }
  if (format == MediaFormat::jpeg) return probe_jpeg(bytes);
  return std::nullopt;
}

// --- BlobStore ---------------------------------------------------------------

BlobStore::BlobStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path BlobStore::path_of(const std::string& storage_ref) const {
  return root_ / storage_ref;
}

std::string BlobStore::put(ByteView bytes, const std::string& content_hash) {
  const std::string ref = content_hash.substr(0, 2) + "/" + content_hash;
  const auto target = path_of(ref);
  if (std::filesystem::exists(target)) return ref;
  std::filesystem::create_directories(target.parent_path());
  const auto temp = target.parent_path() / (content_hash + ".tmp." + crypto::new_id());
  {
    std::ofstream out(temp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::persistence_failure, "cannot write blob " + temp.string());
  }
  std::filesystem::rename(temp, target);  // same bytes either way if another writer won
  return ref;
}

std::vector<std::uint8_t> BlobStore::get(const std::string& storage_ref) const {
  std::ifstream in(path_of(storage_ref), std::ios::binary);
  if (!in) throw Error(ErrorCode::persistence_failure, "missing blob " + storage_ref);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --- MediaLibrary ------------------------------------------------------------

MediaLibrary::MediaLibrary(Store& store, BlobStore& blobs, IngestLimits limits, Clock clock)
    : store_(store), blobs_(blobs), limits_(limits), clock_(std::move(clock)) {}

namespace {

constexpr std::string_view kUploadColumns =
    "upload_id, user_id, filename, modality, format, byte_size, content_hash, storage_ref, consent, "
    "created_at";

MediaUpload read_upload(const Statement& st) {
  MediaUpload u;
  u.upload_id = st.column_text(0);
  u.user_id = st.column_text(1);
  u.filename = st.column_text(2);
  u.modality = parse_modality(st.column_text(3)).value_or(Modality::image);
  u.format = parse_format(st.column_text(4)).value_or(MediaFormat::png);
  u.byte_size = st.column_int(5);
  u.content_hash = st.column_text(6);
  u.storage_ref = st.column_text(7);
  u.consent = st.column_int(8) != 0;
  u.uploaded_at = st.column_int(9);
  return u;
}

std::string base_name(std::string_view filename) {
  const auto slash = filename.find_last_of("/\\");
  std::string name(slash == std::string_view::npos ? filename : filename.substr(slash + 1));
  if (name.size() > 255) name.resize(255);
  return name;
}

}  // namespace

std::optional<MediaUpload> MediaLibrary::find_in(Connection& c, const std::string& upload_id) {
  auto st = c.prepare("SELECT " + std::string(kUploadColumns) + " FROM UPLOADS WHERE upload_id = ?");
  st.bind(1, upload_id);
  if (!st.step()) return std::nullopt;
  return read_upload(st);
}

MediaUpload MediaLibrary::ingest(const std::string& user_id, std::string_view filename,
                                 ByteView bytes, bool consent) {
  if (!consent) {
    throw Error(ErrorCode::consent_required, "explicit consent is required before storing media");
  }
  const MediaFormat format = sniff_format(bytes);
  const Modality modality = modality_of(format);
  const std::int64_t limit = modality == Modality::image ? limits_.image_bytes : limits_.audio_bytes;
  if (static_cast<std::int64_t>(bytes.size()) > limit) {
    throw Error(ErrorCode::too_large, std::string(to_string(modality)) + " uploads are limited to " +
                                          std::to_string(limit) + " bytes");
  }

  MediaUpload upload;
  upload.upload_id = crypto::new_id();
  upload.user_id = user_id;
  upload.filename = base_name(filename);
  upload.modality = modality;
  upload.format = format;
  upload.byte_size = static_cast<std::int64_t>(bytes.size());
  upload.content_hash = crypto::sha256_hex(bytes);
  upload.storage_ref = blobs_.put(bytes, upload.content_hash);
  upload.uploaded_at = clock_();

  try {
    return store_.transactional([&](Connection& c) {
      auto existing = c.prepare("SELECT " + std::string(kUploadColumns) +
                                " FROM UPLOADS WHERE user_id = ? AND content_hash = ?");
      existing.bind(1, user_id).bind(2, upload.content_hash);
      if (existing.step()) return read_upload(existing);

      auto st = c.prepare("INSERT INTO UPLOADS (" + std::string(kUploadColumns) +
                          ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, 1, ?)");
      st.bind(1, upload.upload_id).bind(2, upload.user_id).bind(3, upload.filename);
      st.bind(4, to_string(upload.modality)).bind(5, to_string(upload.format));
      st.bind(6, upload.byte_size).bind(7, upload.content_hash).bind(8, upload.storage_ref);
      st.bind(9, upload.uploaded_at);
      st.run();
      return upload;
    });
  } catch (const ConstraintError&) {
    throw Error(ErrorCode::unknown_user, "unknown user");
  }
}

std::optional<MediaUpload> MediaLibrary::find(const std::string& upload_id) {
  return store_.read([&](Connection& c) { return find_in(c, upload_id); });
}

std::vector<std::uint8_t> MediaLibrary::load_bytes(const MediaUpload& upload) const {
  return blobs_.get(upload.storage_ref);
}

}  // namespace forensight
