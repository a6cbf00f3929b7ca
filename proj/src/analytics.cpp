#include "forensight/analytics.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "forensight/crypto.hpp"
#include "forensight/error.hpp"

namespace forensight {

namespace {

using nlohmann::json;

void tally(Connection& c, std::string_view sql, std::map<std::string, std::int64_t>& into) {
  auto st = c.prepare(sql);
  while (st.step()) into[st.column_text(0)] = st.column_int(1);
}

std::int64_t count(Connection& c, std::string_view sql) {
  auto st = c.prepare(sql);
  st.step();
  return st.column_int(0);
}

std::vector<std::string> deduplicated(std::vector<std::string> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

}  // namespace

std::map<std::string, std::int64_t> per_category(const StatisticsSnapshot& snapshot,
                                                 const DetectorRegistry& registry) {
  std::map<std::string, std::int64_t> out;
  for (const auto& [detector_id, n] : snapshot.per_model) {
    const auto* d = registry.find(detector_id);
    out[d ? std::string(to_string(d->category)) : "unknown"] += n;
  }
  return out;
}

Analytics::Analytics(Store& store, const DetectorRegistry& registry, std::string feedback_salt, Clock clock)
    : store_(store), registry_(registry), salt_(std::move(feedback_salt)), clock_(std::move(clock)) {
  if (salt_.empty()) throw Error(ErrorCode::invalid_config, "feedback salt must not be empty");
}

StatisticsSnapshot Analytics::compute_statistics() {
  StatisticsSnapshot s;
  s.generated_at = clock_();
  store_.read([&](Connection& c) {
    s.total_users = count(c, "SELECT COUNT(*) FROM USERS");
    s.total_predictions = count(c, "SELECT COUNT(*) FROM PREDICTIONS");
    s.real_count = count(c, "SELECT COUNT(*) FROM PREDICTIONS WHERE label = 'real'");
    s.fake_count = count(c, "SELECT COUNT(*) FROM PREDICTIONS WHERE label = 'fake'");
    tally(c, "SELECT detector_id, COUNT(*) FROM PREDICTIONS GROUP BY detector_id", s.per_model);
    tally(c, "SELECT modality, COUNT(*) FROM PREDICTIONS GROUP BY modality", s.per_modality);
    tally(c, "SELECT region, COUNT(*) FROM USERS GROUP BY region", s.per_region_users);
  });
  return s;
}

std::string Analytics::submitter_token(const std::string& user_id) const {
  return crypto::sha256_hex(crypto::as_bytes(salt_ + user_id));
}

std::string Analytics::submit_feedback(const std::string& user_id, const FeedbackForm& form) {
  if (form.rating < 1 || form.rating > 5) throw Error(ErrorCode::invalid_rating, "rating must be 1..5");
  const auto models = deduplicated(form.models_used);
  for (const auto& m : models) {
    if (m != "other" && !registry_.contains(m)) {
      throw Error(ErrorCode::unknown_model_reference, "unknown model in models_used: " + m);
    }
  }
  const auto& best = form.most_accurate_model;
  if (best != "unsure" && best != "other" && !registry_.contains(best)) {
    throw Error(ErrorCode::unknown_model_reference, "unknown most_accurate_model: " + best);
  }
  const auto formats = deduplicated(form.formats_used);
  for (const auto& f : formats) {
    if (f != "image" && f != "audio" && f != "video") {
      throw Error(ErrorCode::invalid_field, "formats_used entries must be image, audio or video");
    }
  }

  const std::string entry_id = crypto::new_id();
  const Micros now = clock_();
  store_.transactional([&](Connection& c) {
    auto st = c.prepare(
        "INSERT INTO FEEDBACK (entry_id, submitter_token, models_used, formats_used, most_accurate_model, "
        "useful_features, improvements, rating, user_role, prior_exposure, free_text, created_at) "
        "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
    st.bind(1, entry_id).bind(2, submitter_token(user_id)).bind(3, json(models).dump());
    st.bind(4, json(formats).dump()).bind(5, best).bind(6, form.useful_features);
    st.bind(7, form.improvements).bind(8, form.rating).bind(9, form.user_role);
    st.bind(10, form.prior_exposure ? 1 : 0).bind(11, form.free_text).bind(12, now);
    st.run();
  });
  return entry_id;
}

FeedbackSummary Analytics::aggregate_feedback() {
  FeedbackSummary summary;
  store_.read([&](Connection& c) {
    auto st = c.prepare("SELECT rating, most_accurate_model, formats_used FROM FEEDBACK");
    std::int64_t rating_sum = 0;
    while (st.step()) {
      ++summary.count;
      const int rating = static_cast<int>(st.column_int(0));
      ++summary.rating_histogram[rating];
      rating_sum += rating;
      ++summary.most_accurate_tally[st.column_text(1)];
      for (const auto& f : json::parse(st.column_text(2))) ++summary.format_tally[f.get<std::string>()];
    }
    if (summary.count > 0) {
      summary.mean_rating = static_cast<double>(rating_sum) / static_cast<double>(summary.count);
    }
  });
  return summary;
}

}  // namespace forensight
