#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forensight/media.hpp"

namespace forensight {

enum class Category {
  backbone_only,
  frequency_based,
  spatial_based,
  fairness_enhanced,
  audio_cnn,
  mllm_aware,
};

enum class AdapterKind { native_heuristic, remote_model, mllm_chat };

std::string_view to_string(Category c);
std::string_view to_string(AdapterKind k);

struct DetectorDescriptor {
  std::string detector_id;
  std::string display_name;
  Modality modality = Modality::image;
  Category category = Category::backbone_only;
  AdapterKind adapter_kind = AdapterKind::remote_model;
  std::string version;
};

/// Immutable catalog; build it once at startup through Builder.
class DetectorRegistry {
 public:
  class Builder {
   public:
    /// Throws duplicate_detector for a repeated id and invalid_config when
    /// category mllm_aware and adapter kind mllm_chat do not coincide.
    Builder& add(DetectorDescriptor descriptor);
    DetectorRegistry build() &&;

   private:
    std::map<std::string, DetectorDescriptor> entries_;
  };

  /// Sorted by detector_id.
  std::vector<DetectorDescriptor> list(std::optional<Modality> filter = std::nullopt) const;
  const DetectorDescriptor* find(std::string_view detector_id) const;
  bool contains(std::string_view detector_id) const { return find(detector_id) != nullptr; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, DetectorDescriptor, std::less<>> entries_;
};

/// The published detector families (remote), the MLLM chat models, and the
/// two native heuristics.
DetectorRegistry default_registry();

inline constexpr double kFakeThreshold = 0.5;

enum class Label { real, fake };

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view text);

/// fake iff score >= 0.5.
constexpr Label label_for(double score) { return score >= kFakeThreshold ? Label::fake : Label::real; }

struct FaceRegion {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double score = 0.0;
};

struct DetectionResult {
  Label label = Label::real;
  double score = 0.0;
  std::optional<std::vector<FaceRegion>> faces;
  std::int64_t latency_ms = 0;
};

}  // namespace forensight
