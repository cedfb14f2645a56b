#include "pufsense/harness.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pufsense::harness {

// ------------------------------------------------------------------ config --

HarnessConfig HarnessConfig::from_file(const fs::path& path) {
  HarnessConfig cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    cfg.apply_line(line);
  }
  return cfg;
}

void HarnessConfig::apply_line(const std::string& line) {
  auto eq = line.find('=');
  if (eq == std::string::npos) throw std::runtime_error("config: expected key=value: " + line);
  std::string key = line.substr(0, eq);
  std::string value = line.substr(eq + 1);
  if (key == "seed")
    seed = std::stoull(value);
  else if (key == "puf_profile")
    puf_profile = value;
  else if (key == "code") {
    if (value == "bch")
      code = CodeParams::bch492();
    else if (value == "rm_rep")
      code = CodeParams::rm_rep80();
    else
      throw std::runtime_error("config: unknown code " + value);
  } else if (key == "root")
    root = value;
  else if (key == "replay_capacity")
    replay_capacity = std::stoull(value);
  else if (key == "g1_bits")
    accounting_widths.g1_bits = uint32_t(std::stoul(value));
  else if (key == "g2_bits")
    accounting_widths.g2_bits = uint32_t(std::stoul(value));
  else if (key == "storage_key")
    storage_key = from_hex(value);
  else
    throw std::runtime_error("config: unknown key " + key);
}

// ----------------------------------------------------------------- file IO --

void write_file(const fs::path& path, std::span<const uint8_t> data) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
}

std::optional<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_tagged(const fs::path& path, const char (&tag)[5], std::span<const uint8_t> data) {
  ByteWriter w;
  w.str(std::string_view(tag, 4));
  w.bytes(data);
  write_file(path, w.buf);
}

std::optional<Bytes> read_tagged(const fs::path& path, const char (&tag)[5]) {
  auto data = read_file(path);
  if (!data || data->size() < 4 || std::memcmp(data->data(), tag, 4) != 0) return std::nullopt;
  return Bytes(data->begin() + 4, data->end());
}

// ---------------------------------------------------------------- TA state --

void save_ta(const HarnessConfig& cfg, const roles::TaState& ta) {
  write_tagged(cfg.ta_dir() / "public.bin", "TAPB", ta.public_bundle().serialize());
  ByteWriter w;
  auto msk = ta.master.msk.to_bytes();
  auto alpha = ta.xk.alpha.to_bytes();
  auto beta = ta.xk.beta.to_bytes();
  w.bytes(msk);
  w.bytes(alpha);
  w.bytes(beta);
  write_tagged(cfg.ta_dir() / "secret.bin", "TASK", w.buf);
}

std::optional<roles::SetupBundle> load_setup_bundle(const HarnessConfig& cfg) {
  auto data = read_tagged(cfg.ta_dir() / "public.bin", "TAPB");
  if (!data) return std::nullopt;
  return roles::SetupBundle::deserialize(*data);
}

std::optional<TaSecrets> load_ta_secrets(const HarnessConfig& cfg) {
  auto data = read_tagged(cfg.ta_dir() / "secret.bin", "TASK");
  if (!data || data->size() != 96) return std::nullopt;
  TaSecrets s;
  auto span = std::span<const uint8_t>(*data);
  auto msk = bn254::Fr::from_bytes_checked(span.first<32>());
  auto alpha = bn254::Fr::from_bytes_checked(span.subspan<32, 32>());
  auto beta = bn254::Fr::from_bytes_checked(span.subspan<64, 32>());
  if (!msk || !alpha || !beta) return std::nullopt;
  s.msk = *msk;
  s.xk = {*alpha, *beta};
  return s;
}

// ---------------------------------------------------------------- registry --

namespace {

Bytes serialize_entry(const HarnessConfig& cfg, const SensorEntry& e) {
  ByteWriter w;
  w.u16(uint16_t(e.identity.size()));
  w.bytes(e.identity);
  w.u64(e.device_seed);
  w.u8(uint8_t(e.puf_profile.size()));
  w.str(e.puf_profile);
  auto pkb = e.record.pk.serialize();
  w.bytes(pkb);
  w.bytes(e.record.cert.serialize());
  Bytes helper = serialize_helper(e.record.helper, cfg.storage_key);
  w.u32(uint32_t(helper.size()));
  w.bytes(helper);
  return w.buf;
}

std::optional<SensorEntry> parse_entry(const HarnessConfig& cfg, std::span<const uint8_t> in) {
  ByteReader r{in};
  SensorEntry e;
  e.identity = r.take(r.u16());
  e.device_seed = r.u64();
  Bytes profile = r.take(r.u8());
  e.puf_profile.assign(profile.begin(), profile.end());
  Bytes pkb = r.take(64);
  Bytes certb = r.take(96);
  uint32_t hlen = r.u32();
  Bytes helper = r.take(hlen);
  if (r.fail || !r.done()) return std::nullopt;
  auto pk = bn254::G2::deserialize(pkb);
  auto cert = Certificate::deserialize(certb);
  auto hd = parse_helper(helper, cfg.storage_key);
  if (!pk || !cert || !hd) return std::nullopt;
  e.record.identity = e.identity;
  e.record.pk = *pk;
  e.record.cert = *cert;
  e.record.helper = *hd;
  return e;
}

std::string sanitize_id(std::string_view id) {
  std::string s;
  for (char c : id)
    s.push_back((isalnum(uint8_t(c)) || c == '-' || c == '_') ? c : '_');
  return s;
}

}  // namespace

Registry Registry::load(const HarnessConfig& cfg) {
  Registry reg;
  if (!fs::exists(cfg.sensors_dir())) return reg;
  std::vector<fs::path> paths;
  for (const auto& dir : fs::directory_iterator(cfg.sensors_dir()))
    if (dir.is_regular_file() && dir.path().extension() == ".sen") paths.push_back(dir.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    auto data = read_tagged(p, "SENR");
    if (!data) throw std::runtime_error("registry: corrupt entry " + p.string());
    auto entry = parse_entry(cfg, *data);
    if (!entry) throw std::runtime_error("registry: cannot parse " + p.string());
    reg.entries_.push_back(std::move(*entry));
  }
  return reg;
}

void Registry::add(const HarnessConfig& cfg, const SensorEntry& entry) {
  std::string id(entry.identity.begin(), entry.identity.end());
  if (find(id)) throw std::runtime_error("registry: duplicate identity " + id);
  entries_.push_back(entry);
  write_tagged(cfg.sensors_dir() / (sanitize_id(id) + ".sen"), "SENR",
               serialize_entry(cfg, entry));
}

const SensorEntry* Registry::find(std::string_view id) const {
  for (const auto& e : entries_)
    if (std::string_view(reinterpret_cast<const char*>(e.identity.data()), e.identity.size()) ==
        id)
      return &e;
  return nullptr;
}

roles::Sensor restore_sensor(const SensorEntry& entry) {
  SramParams params = entry.puf_profile == "sram32" ? sram_profile_32bit(entry.device_seed)
                                                    : sram_profile_8bit(entry.device_seed);
  return roles::Sensor(SramPuf(params), entry.record.helper.challenge, entry.record);
}

// -------------------------------------------------------------- node state --

void save_node(const HarnessConfig& cfg, const NodeStore& store) {
  std::string id = sanitize_id(
      std::string_view(reinterpret_cast<const char*>(store.identity.data()), store.identity.size()));
  fs::path dir = cfg.nodes_dir() / id;
  ByteWriter w;
  w.u16(uint16_t(store.identity.size()));
  w.bytes(store.identity);
  w.u64(store.device_seed);
  w.u8(uint8_t(store.chain.k_enc.size()));
  w.bytes(store.chain.k_enc);
  w.u8(uint8_t(store.chain.k_mac.size()));
  w.bytes(store.chain.k_mac);
  auto root_sk = store.chain.root_sk.to_bytes();
  w.bytes(root_sk);
  auto root_pk = store.chain.root_pk.serialize();
  w.bytes(root_pk);
  w.bytes(store.cert.serialize());
  write_tagged(dir / "device.bin", "NDEV", w.buf);
  write_tagged(dir / "boot.bin", "NIMG", store.image.serialize());
  write_file(dir / "w_sign.pufw", serialize_helper(store.w_sign, cfg.storage_key));
  write_file(dir / "w_enc.pufw", serialize_helper(store.w_enc, cfg.storage_key));
  write_tagged(dir / "kxr.bin", "NKXR", store.kxr.serialize());
}

std::optional<NodeStore> load_node(const HarnessConfig& cfg, std::string_view id) {
  fs::path dir = cfg.nodes_dir() / sanitize_id(id);
  auto dev = read_tagged(dir / "device.bin", "NDEV");
  auto img = read_tagged(dir / "boot.bin", "NIMG");
  auto w1 = read_file(dir / "w_sign.pufw");
  auto w2 = read_file(dir / "w_enc.pufw");
  auto kxr = read_tagged(dir / "kxr.bin", "NKXR");
  if (!dev || !img || !w1 || !w2 || !kxr) return std::nullopt;

  NodeStore store;
  ByteReader r{*dev};
  store.identity = r.take(r.u16());
  store.device_seed = r.u64();
  store.chain.k_enc = r.take(r.u8());
  store.chain.k_mac = r.take(r.u8());
  Bytes root_sk = r.take(32);
  Bytes root_pk = r.take(64);
  Bytes certb = r.take(96);
  if (r.fail || !r.done()) return std::nullopt;
  auto sk = bn254::Fr::from_bytes_checked(std::span<const uint8_t>(root_sk).first<32>());
  auto pk = bn254::G2::deserialize(root_pk);
  auto cert = Certificate::deserialize(certb);
  auto image = node::BootImage::deserialize(*img);
  auto helper1 = parse_helper(*w1, cfg.storage_key);
  auto helper2 = parse_helper(*w2, cfg.storage_key);
  auto record = node::KeyExchangeRecord::deserialize(*kxr);
  if (!sk || !pk || !cert || !image || !helper1 || !helper2 || !record) return std::nullopt;
  store.chain.root_sk = *sk;
  store.chain.root_pk = *pk;
  store.cert = *cert;
  store.image = std::move(*image);
  store.w_sign = std::move(*helper1);
  store.w_enc = std::move(*helper2);
  store.kxr = std::move(*record);
  return store;
}

uint64_t next_event_count(const HarnessConfig& cfg, std::string_view id) {
  fs::path path = cfg.nodes_dir() / sanitize_id(id) / "event_count";
  uint64_t count = 0;
  if (auto data = read_file(path)) {
    std::string s(data->begin(), data->end());
    count = std::stoull(s);
  }
  count++;
  std::string next = std::to_string(count);
  write_file(path, as_bytes(next));
  return count;
}

// ------------------------------------------------------- server replay log --

std::vector<Bytes> load_server_taus(const HarnessConfig& cfg) {
  std::vector<Bytes> taus;
  auto data = read_tagged(cfg.server_dir() / "replay.bin", "SRPL");
  if (!data) return taus;
  ByteReader r{*data};
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n && !r.fail; i++) taus.push_back(r.take(16));
  return taus;
}

void save_server_taus(const HarnessConfig& cfg, std::span<const Bytes> taus) {
  ByteWriter w;
  w.u32(uint32_t(taus.size()));
  for (const auto& t : taus) w.bytes(t);
  write_tagged(cfg.server_dir() / "replay.bin", "SRPL", w.buf);
}

// ---------------------------------------------------------------- transport --

namespace {

Bytes recv_framed(int fd) {
  auto read_exact = [&](uint8_t* buf, size_t n) {
    size_t got = 0;
    while (got < n) {
      ssize_t r = ::read(fd, buf + got, n - got);
      if (r <= 0) throw std::runtime_error("socket read failed");
      got += size_t(r);
    }
  };
  uint8_t head[4];
  read_exact(head, 4);
  uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 | uint32_t(head[2]) << 8 |
                 uint32_t(head[3]);
  if (len == 0 || len > (1u << 30)) throw std::runtime_error("socket frame too large");
  Bytes out(4 + len);
  std::memcpy(out.data(), head, 4);
  read_exact(out.data() + 4, len);
  return out;
}

void send_all(int fd, std::span<const uint8_t> data) {
  size_t sent = 0;
  while (sent < data.size()) {
    ssize_t r = ::write(fd, data.data() + sent, data.size() - sent);
    if (r <= 0) throw std::runtime_error("socket write failed");
    sent += size_t(r);
  }
}

}  // namespace

Bytes loopback_exchange(const Bytes& framed_request,
                        const std::function<Bytes(const Bytes&)>& handler) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;  // ephemeral
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listener, 1) != 0) {
    ::close(listener);
    throw std::runtime_error("bind/listen failed");
  }
  socklen_t alen = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &alen);

  std::thread server([&] {
    int conn = ::accept(listener, nullptr, nullptr);
    if (conn < 0) return;
    try {
      Bytes request = recv_framed(conn);
      Bytes reply = handler(request);
      send_all(conn, reply);
    } catch (...) {
    }
    ::close(conn);
  });

  Bytes reply;
  try {
    int client = ::socket(AF_INET, SOCK_STREAM, 0);
    if (client < 0) throw std::runtime_error("socket() failed");
    if (::connect(client, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(client);
      throw std::runtime_error("connect failed");
    }
    send_all(client, framed_request);
    reply = recv_framed(client);
    ::close(client);
  } catch (...) {
    server.join();
    ::close(listener);
    throw;
  }
  server.join();
  ::close(listener);
  return reply;
}

}  // namespace pufsense::harness
