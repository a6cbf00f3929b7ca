#include "forensight/platform.hpp"

namespace forensight {

namespace {

std::unique_ptr<Store> open_migrated(const std::string& url) {
  auto store = Store::open(url);
  store->migrate();
  return store;
}

MllmConfig mllm_config(const ServiceConfig& c) {
  MllmConfig m;
  m.chat_url = c.chat_url;
  m.transcribe_url = c.transcribe_url;
  m.timeout = c.adapter_timeout;
  return m;
}

}  // namespace

Platform::Platform(const ServiceConfig& config, Clock clock)
    : config_(config),
      store_(open_migrated(config.store_url)),
      registry_(default_registry()),
      blobs_(config.blob_root),
      accounts_(*store_, AccountsConfig{config.token_key, 24 * 60 * 60, config.admin_emails, config.bcrypt_cost},
                clock),
      media_(*store_, blobs_, config.limits, clock),
      remote_(config.adapter_urls, config.adapter_timeout),
      orchestrator_(*store_, accounts_, media_, registry_, remote_, clock),
      mllm_(*store_, accounts_, media_, registry_, mllm_config(config), clock),
      analytics_(*store_, registry_, config.feedback_salt, clock) {}

}  // namespace forensight
