#pragma once

#include <memory>

#include "forensight/accounts.hpp"
#include "forensight/adapters.hpp"
#include "forensight/analytics.hpp"
#include "forensight/config.hpp"
#include "forensight/detectors.hpp"
#include "forensight/media.hpp"
#include "forensight/mllm.hpp"
#include "forensight/orchestrator.hpp"
#include "forensight/store.hpp"

namespace forensight {

/// Wires every module over one store. Construction opens and migrates the
/// store; a Platform holds no per-request state, so any number of them (in
/// one or many processes) may share the same store and blob root.
class Platform {
 public:
  explicit Platform(const ServiceConfig& config, Clock clock = system_clock());

  Store& store() { return *store_; }
  const DetectorRegistry& registry() const { return registry_; }
  BlobStore& blobs() { return blobs_; }
  Accounts& accounts() { return accounts_; }
  MediaLibrary& media() { return media_; }
  const RemoteDetectorClient& remote() const { return remote_; }
  Orchestrator& orchestrator() { return orchestrator_; }
  MllmWorkspace& mllm() { return mllm_; }
  Analytics& analytics() { return analytics_; }
  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  std::unique_ptr<Store> store_;
  DetectorRegistry registry_;
  BlobStore blobs_;
  Accounts accounts_;
  MediaLibrary media_;
  RemoteDetectorClient remote_;
  Orchestrator orchestrator_;
  MllmWorkspace mllm_;
  Analytics analytics_;
};

}  // namespace forensight
