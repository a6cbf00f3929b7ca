#include "forensight/detectors.hpp"

#include "forensight/error.hpp"

namespace forensight {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::backbone_only: return "backbone_only";
    case Category::frequency_based: return "frequency_based";
    case Category::spatial_based: return "spatial_based";
    case Category::fairness_enhanced: return "fairness_enhanced";
    case Category::audio_cnn: return "audio_cnn";
    case Category::mllm_aware: return "mllm_aware";
  }
  return "backbone_only";
}

std::string_view to_string(AdapterKind k) {
  switch (k) {
    case AdapterKind::native_heuristic: return "native_heuristic";
    case AdapterKind::remote_model: return "remote_model";
    case AdapterKind::mllm_chat: return "mllm_chat";
  }
  return "remote_model";
}

std::string_view to_string(Label l) { return l == Label::fake ? "fake" : "real"; }

std::optional<Label> parse_label(std::string_view text) {
  if (text == "real") return Label::real;
  if (text == "fake") return Label::fake;
  return std::nullopt;
}

DetectorRegistry::Builder& DetectorRegistry::Builder::add(DetectorDescriptor descriptor) {
  if ((descriptor.category == Category::mllm_aware) != (descriptor.adapter_kind == AdapterKind::mllm_chat)) {
    throw Error(ErrorCode::invalid_config,
                "detector " + descriptor.detector_id + ": mllm_aware category requires mllm_chat adapter");
  }
  const std::string id = descriptor.detector_id;
  if (!entries_.emplace(id, std::move(descriptor)).second) {
    throw Error(ErrorCode::duplicate_detector, "detector id registered twice: " + id);
  }
  return *this;
}

DetectorRegistry DetectorRegistry::Builder::build() && {
  DetectorRegistry registry;
  for (auto& [id, d] : entries_) registry.entries_.emplace(id, std::move(d));
  return registry;
}

std::vector<DetectorDescriptor> DetectorRegistry::list(std::optional<Modality> filter) const {
  std::vector<DetectorDescriptor> out;
  for (const auto& [id, d] : entries_) {
    if (!filter || d.modality == *filter) out.push_back(d);
  }
  return out;
}

const DetectorDescriptor* DetectorRegistry::find(std::string_view detector_id) const {
  const auto it = entries_.find(detector_id);
  return it == entries_.end() ? nullptr : &it->second;
}

DetectorRegistry default_registry() {
  using enum Category;
  using enum AdapterKind;
  constexpr auto image = Modality::image;
  constexpr auto audio = Modality::audio;
  DetectorRegistry::Builder b;
  b.add({"xception", "Xception", image, backbone_only, remote_model, "1"})
      .add({"efficientnet-b4", "EfficientNet-B4", image, backbone_only, remote_model, "1"})
      .add({"vit-b16", "ViT-B/16", image, backbone_only, remote_model, "1"})
      .add({"f3net", "F3Net", image, frequency_based, remote_model, "1"})
      .add({"spsl", "SPSL", image, frequency_based, remote_model, "1"})
      .add({"srm", "SRM", image, frequency_based, remote_model, "1"})
      .add({"ucf", "UCF", image, spatial_based, remote_model, "1"})
      .add({"core", "CORE", image, spatial_based, remote_model, "1"})
      .add({"univfd", "UnivFD", image, spatial_based, remote_model, "1"})
      .add({"daw-fdd", "DAW-FDD", image, fairness_enhanced, remote_model, "1"})
      .add({"dag-fdd", "DAG-FDD", image, fairness_enhanced, remote_model, "1"})
      .add({"pg-fdd", "PG-FDD", image, fairness_enhanced, remote_model, "1"})
      .add({"freq-heuristic-v1", "Spectral energy heuristic", image, frequency_based, native_heuristic, "1"})
      .add({"audio-cnn", "Audio CNN", audio, audio_cnn, remote_model, "1"})
      .add({"audio-flatness-v1", "Spectral flatness heuristic", audio, audio_cnn, native_heuristic, "1"})
      .add({"qwen-vl-chat", "Qwen-VL-Chat", image, mllm_aware, mllm_chat, "1"})
      .add({"llava-next-13b", "LLaVA-NeXT-13B", image, mllm_aware, mllm_chat, "1"})
      .add({"internvl-chat-v1.5", "InternVL-Chat-V1.5", image, mllm_aware, mllm_chat, "1"})
      .add({"whisper+qwen2-vl-2b", "Whisper + Qwen2-VL-2B", audio, mllm_aware, mllm_chat, "1"});
  return std::move(b).build();
}

}  // namespace forensight
