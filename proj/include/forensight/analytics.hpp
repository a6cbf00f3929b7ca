#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forensight/clock.hpp"
#include "forensight/detectors.hpp"
#include "forensight/store.hpp"

namespace forensight {

struct StatisticsSnapshot {
  std::int64_t total_users = 0;
  std::int64_t total_predictions = 0;
  std::int64_t real_count = 0;
  std::int64_t fake_count = 0;
  std::map<std::string, std::int64_t> per_model;
  std::map<std::string, std::int64_t> per_modality;
  std::map<std::string, std::int64_t> per_region_users;
  Micros generated_at = 0;
};

/// Prediction counts per taxonomy category, derived from per_model.
std::map<std::string, std::int64_t> per_category(const StatisticsSnapshot& snapshot,
                                                 const DetectorRegistry& registry);

struct FeedbackForm {
  std::vector<std::string> models_used;
  std::vector<std::string> formats_used;  // image | audio | video
  std::string most_accurate_model;        // detector id, "unsure" or "other"
  std::string useful_features;
  std::string improvements;
  int rating = 0;
  std::string user_role;
  bool prior_exposure = false;
  std::optional<std::string> free_text;
};

struct FeedbackSummary {
  std::int64_t count = 0;
  std::map<int, std::int64_t> rating_histogram;
  std::optional<double> mean_rating;
  std::map<std::string, std::int64_t> most_accurate_tally;
  std::map<std::string, std::int64_t> format_tally;
};

class Analytics {
 public:
  Analytics(Store& store, const DetectorRegistry& registry, std::string feedback_salt, Clock clock);

  /// Full recount over raw rows inside one read snapshot.
  StatisticsSnapshot compute_statistics();

  /// Stores the form under hex(SHA-256(salt || user_id)); the raw user id is
  /// never written. Costs no credits.
  std::string submit_feedback(const std::string& user_id, const FeedbackForm& form);
  FeedbackSummary aggregate_feedback();

  std::string submitter_token(const std::string& user_id) const;

 private:
  Store& store_;
  const DetectorRegistry& registry_;
  std::string salt_;
  Clock clock_;
};

}  // namespace forensight
