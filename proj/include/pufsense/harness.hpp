#pragma once

// Shared plumbing for the command-line tool: directory-backed state for the
// authority, sensors, camera nodes, server and the storage-server stub, plus
// a loopback stream transport for the role messages.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pufsense/bls.hpp"
#include "pufsense/node.hpp"
#include "pufsense/roles.hpp"

namespace pufsense::harness {

namespace fs = std::filesystem;

struct HarnessConfig {
  uint64_t seed = 1;
  std::string puf_profile = "sram8";  // sram8 | sram32 | ro
  CodeParams code = CodeParams::bch492();
  GroupWidths accounting_widths = GroupConfig::compact_bn_widths();
  size_t replay_capacity = 4096;
  fs::path root = "pufsense-data";
  Bytes storage_key = {'p', 'u', 'f', 's', 'e', 'n', 's', 'e', '-', 's', 't', 'o', 'r', 'e'};

  fs::path ta_dir() const { return root / "ta"; }
  fs::path sensors_dir() const { return root / "sensors"; }
  fs::path nodes_dir() const { return root / "nodes"; }
  fs::path server_dir() const { return root / "server"; }
  fs::path store_dir() const { return root / "store"; }

  /// key=value lines; unknown keys rejected.
  static HarnessConfig from_file(const fs::path& path);
  void apply_line(const std::string& line);
};

// ---------------------------------------------------------------- file IO --

void write_file(const fs::path& path, std::span<const uint8_t> data);
std::optional<Bytes> read_file(const fs::path& path);

/// 4-byte type tag + payload.
void write_tagged(const fs::path& path, const char (&tag)[5], std::span<const uint8_t> data);
std::optional<Bytes> read_tagged(const fs::path& path, const char (&tag)[5]);

// ----------------------------------------------------------------- TA state --

struct TaSecrets {
  bn254::Fr msk;
  niwi::ExtractKey xk;
};

void save_ta(const HarnessConfig& cfg, const roles::TaState& ta);
std::optional<roles::SetupBundle> load_setup_bundle(const HarnessConfig& cfg);
std::optional<TaSecrets> load_ta_secrets(const HarnessConfig& cfg);

// ---------------------------------------------------------------- registry --

struct SensorEntry {
  Bytes identity;
  uint64_t device_seed = 0;
  std::string puf_profile;
  EnrollmentRecord record;
};

/// Append-only sensor registry; duplicate identities rejected.
class Registry {
 public:
  static Registry load(const HarnessConfig& cfg);
  void add(const HarnessConfig& cfg, const SensorEntry& entry);  // persists immediately
  const SensorEntry* find(std::string_view id) const;
  const std::vector<SensorEntry>& entries() const { return entries_; }

 private:
  std::vector<SensorEntry> entries_;
};

/// Rebuild the sensor simulator (PUF model + enrollment) from its entry.
roles::Sensor restore_sensor(const SensorEntry& entry);

// -------------------------------------------------------------- node state --

struct NodeStore {
  Bytes identity;
  uint64_t device_seed = 0;
  node::BootChainKeys chain;  // device-fused keys (mask-ROM/eFUSE analog)
  node::BootImage image;
  HelperData w_sign, w_enc;
  Certificate cert;
  node::KeyExchangeRecord kxr;
};

void save_node(const HarnessConfig& cfg, const NodeStore& store);
std::optional<NodeStore> load_node(const HarnessConfig& cfg, std::string_view id);

uint64_t next_event_count(const HarnessConfig& cfg, std::string_view id);  // persistent counter

// ------------------------------------------------------- server replay log --

std::vector<Bytes> load_server_taus(const HarnessConfig& cfg);
void save_server_taus(const HarnessConfig& cfg, std::span<const Bytes> taus);

// ---------------------------------------------------------------- transport --

/// One-shot loopback exchange: spawns a listener, hands the request to the
/// handler, returns the handler's reply to the client. Exercises the framed
/// message format over a real stream socket.
Bytes loopback_exchange(const Bytes& framed_request,
                        const std::function<Bytes(const Bytes&)>& handler);

}  // namespace pufsense::harness
