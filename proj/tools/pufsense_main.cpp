// Command-line front end: authority setup and enrollment, the reporting
// pipeline against a local server, the secure camera node pipeline against a
// directory storage server, characterization dumps/metrics, and the
// reproduction tables.

#include <CLI11.hpp>

#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>

#include "pufsense/harness.hpp"

using namespace pufsense;
using harness::HarnessConfig;
namespace fs = std::filesystem;

namespace {

constexpr int EXIT_ACCEPT = 0;
constexpr int EXIT_REJECT = 1;
constexpr int EXIT_USAGE = 2;

Bytes id_bytes(const std::string& id) { return Bytes(id.begin(), id.end()); }

uint64_t device_seed_for(const HarnessConfig& cfg, const std::string& id) {
  Rng rng = Rng(cfg.seed).child("device").child(id);
  return rng.next_u64();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// payload argument: @path reads a file, anything else is taken literally
Bytes read_payload(const std::string& spec) {
  if (!spec.empty() && spec[0] == '@') {
    auto data = harness::read_file(spec.substr(1));
    if (!data) throw std::runtime_error("cannot read payload file " + spec.substr(1));
    return *data;
  }
  return Bytes(spec.begin(), spec.end());
}

PufChallenge sensor_challenge(const HarnessConfig& cfg, uint32_t key_bits) {
  size_t blocks = num_blocks(uint16_t(key_bits), cfg.code);
  return PufChallenge::sram_range(0, uint32_t(blocks * cfg.code.n));
}

// ------------------------------------------------------------------- ta ---

int cmd_ta_setup(const HarnessConfig& cfg) {
  Rng rng = Rng(cfg.seed).child("ta");
  roles::TaState ta = roles::ta_setup(rng);
  harness::save_ta(cfg, ta);
  std::cout << "ta: wrote " << (cfg.ta_dir() / "public.bin").string() << " and "
            << (cfg.ta_dir() / "secret.bin").string() << "\n";
  return EXIT_ACCEPT;
}

int cmd_ta_enroll(const HarnessConfig& cfg, const std::string& id) {
  auto bundle = harness::load_setup_bundle(cfg);
  auto secrets = harness::load_ta_secrets(cfg);
  if (!bundle || !secrets) {
    std::cerr << "ta enroll: run `ta setup` first\n";
    return EXIT_REJECT;
  }
  harness::Registry registry = harness::Registry::load(cfg);
  if (registry.find(id)) {
    std::cerr << "ta enroll: duplicate identity " << id << "\n";
    return EXIT_REJECT;
  }

  harness::SensorEntry entry;
  entry.identity = id_bytes(id);
  entry.device_seed = device_seed_for(cfg, id);
  entry.puf_profile = cfg.puf_profile;

  PufChallenge challenge = sensor_challenge(cfg, SIGNING_KEY_BITS);
  MasterKeys master{secrets->msk, bundle->mpk};
  Rng enroll_rng = Rng(cfg.seed).child("enroll").child(id);
  if (cfg.puf_profile == "ro") {
    RoPuf puf(ro_profile_fpga(entry.device_seed));
    challenge = PufChallenge::ro_sequential(
        uint32_t((challenge.count + 2) / 3));  // 3 bits per pair
    entry.record = certibs_enroll(enroll_rng, master, entry.identity, puf.reference(challenge),
                                  cfg.code, challenge);
  } else if (cfg.puf_profile == "sram32") {
    SramPuf puf(sram_profile_32bit(entry.device_seed));
    entry.record = certibs_enroll(enroll_rng, master, entry.identity, puf.reference(challenge),
                                  cfg.code, challenge);
  } else {
    SramParams params = sram_profile_8bit(entry.device_seed);
    if (params.num_cells < challenge.count) params.num_cells = challenge.count;
    SramPuf puf(params);
    entry.record = certibs_enroll(enroll_rng, master, entry.identity, puf.reference(challenge),
                                  cfg.code, challenge);
  }
  registry.add(cfg, entry);
  std::cout << "ta: enrolled " << id << " (" << registry.entries().size()
            << " sensors in registry)\n";
  return EXIT_ACCEPT;
}

// --------------------------------------------------------------- report ---

roles::Sensor restore_sensor_any(const harness::SensorEntry& entry) {
  if (entry.puf_profile == "ro") {
    RoPuf puf(ro_profile_fpga(entry.device_seed));
    return roles::Sensor(std::move(puf), entry.record.helper.challenge, entry.record);
  }
  SramParams params = entry.puf_profile == "sram32" ? sram_profile_32bit(entry.device_seed)
                                                    : sram_profile_8bit(entry.device_seed);
  if (params.num_cells < entry.record.helper.challenge.count)
    params.num_cells = entry.record.helper.challenge.count;
  return roles::Sensor(SramPuf(params), entry.record.helper.challenge, entry.record);
}

int cmd_report(const HarnessConfig& cfg, const std::string& sensors_csv,
               const std::string& payloads_csv, const std::string& out_path, bool tamper,
               const std::string& transport, uint64_t clock) {
  auto bundle = harness::load_setup_bundle(cfg);
  if (!bundle) {
    std::cerr << "report: run `ta setup` first\n";
    return EXIT_REJECT;
  }
  harness::Registry registry = harness::Registry::load(cfg);

  auto ids = split_csv(sensors_csv);
  auto payload_specs = split_csv(payloads_csv);
  if (ids.empty() || ids.size() != payload_specs.size()) {
    std::cerr << "report: need one payload per sensor\n";
    return EXIT_USAGE;
  }

  std::vector<AttestedReading> readings;
  uint64_t total_payload = 0;
  for (size_t i = 0; i < ids.size(); i++) {
    const auto* entry = registry.find(ids[i]);
    if (!entry) {
      std::cerr << "report: sensor " << ids[i] << " not enrolled\n";
      return EXIT_REJECT;
    }
    roles::Sensor sensor = restore_sensor_any(*entry);
    Bytes payload = read_payload(payload_specs[i]);
    total_payload += payload.size();
    readings.push_back(sensor.attest(payload, clock));
  }

  Rng host_rng = Rng(cfg.seed).child("host").child(clock);
  roles::ReportBundle report =
      roles::host_aggregate_and_prove(readings, bundle->crs, bundle->mpk, host_rng);
  Bytes wire = report.serialize();
  if (tamper && !wire.empty()) wire[wire.size() / 2] ^= 0x01;
  if (!out_path.empty()) harness::write_file(out_path, wire);

  // server side: bounded replay cache persisted across runs
  roles::ServerState server(bundle->crs, bundle->mpk, cfg.replay_capacity);
  for (auto& tau : harness::load_server_taus(cfg)) server.preload_tau(std::move(tau));

  auto handle = [&](const Bytes& framed) {
    roles::VerifyResult verdict{false, "malformed"};
    auto msg = roles::parse_message(framed);
    if (msg && msg->first == roles::MsgType::report) {
      auto parsed = roles::ReportBundle::deserialize(msg->second);
      if (parsed) verdict = server.verify(*parsed);
    }
    Bytes reply(verdict.reason.begin(), verdict.reason.end());
    return roles::frame_message(roles::MsgType::verdict, reply);
  };

  Bytes framed = roles::frame_message(roles::MsgType::report, wire);
  Bytes reply_frame;
  if (transport == "socket") {
    reply_frame = harness::loopback_exchange(framed, handle);
  } else {
    fs::path inbox = cfg.server_dir() / "inbox.bin";
    harness::write_file(inbox, framed);
    auto stored = harness::read_file(inbox);
    reply_frame = handle(*stored);
  }
  harness::save_server_taus(cfg, server.tau_snapshot());

  auto reply = roles::parse_message(reply_frame);
  std::string verdict = reply ? std::string(reply->second.begin(), reply->second.end())
                              : std::string("malformed");

  uint32_t q = uint32_t(ids.size());
  auto counts = niwi::element_counts(GroupConfig::Setting::asymmetric, q, true,
                                     cfg.accounting_widths);
  auto actual = niwi::actual_element_counts(q, cfg.accounting_widths);
  std::cout << "verdict: " << (verdict == "accept" ? "accept" : "reject: " + verdict) << "\n";
  std::cout << "overhead: " << counts.bytes() << " bytes (published count, " << counts.g1_elems
            << " G1 + " << counts.g2_elems << " G2 at " << cfg.accounting_widths.g1_bits << "/"
            << cfg.accounting_widths.g2_bits << " bits)\n";
  std::cout << "          " << actual.bytes() << " bytes (transmitted count incl. committed h_c)\n";
  if (total_payload)
    std::cout << "          payload " << total_payload << " bytes, overhead fraction "
              << double(counts.bytes()) / double(total_payload) << "\n";
  std::cout << "          wire bundle " << wire.size() << " bytes at backend widths\n";
  return verdict == "accept" ? EXIT_ACCEPT : EXIT_REJECT;
}

// ----------------------------------------------------------------- node ---

int cmd_node_enroll(const HarnessConfig& cfg, const std::string& id) {
  auto bundle = harness::load_setup_bundle(cfg);
  auto secrets = harness::load_ta_secrets(cfg);
  if (!bundle || !secrets) {
    std::cerr << "node enroll: run `ta setup` first\n";
    return EXIT_REJECT;
  }
  if (harness::load_node(cfg, id)) {
    std::cerr << "node enroll: duplicate identity " << id << "\n";
    return EXIT_REJECT;
  }

  harness::NodeStore store;
  store.identity = id_bytes(id);
  store.device_seed = device_seed_for(cfg, id);
  RoPuf puf(ro_profile_fpga(store.device_seed));

  // disjoint challenge windows for the signing and encryption keys
  uint32_t pairs_sign = uint32_t((num_blocks(SIGNING_KEY_BITS, cfg.code) * cfg.code.n + 2) / 3);
  uint32_t pairs_enc = uint32_t((num_blocks(128, cfg.code) * cfg.code.n + 2) / 3);
  std::vector<uint32_t> idx1(pairs_sign), idx2(pairs_enc);
  for (uint32_t i = 0; i < pairs_sign; i++) idx1[i] = i;
  for (uint32_t i = 0; i < pairs_enc; i++) idx2[i] = pairs_sign + 1 + i;
  PufChallenge c1 = PufChallenge::ro_pairs(idx1);
  PufChallenge c2 = PufChallenge::ro_pairs(idx2);

  Rng rng = Rng(cfg.seed).child("node").child(id);
  KeyMaterial sk_material = random_key_material(rng, SIGNING_KEY_BITS);
  KeyMaterial ke_material = random_key_material(rng, 128);
  store.w_sign = gen(puf.reference(c1), sk_material, cfg.code, c1);
  store.w_enc = gen(puf.reference(c2), ke_material, cfg.code, c2);

  node::CameraKeys keys;
  keys.sk = scalar_from_key(sk_material);
  keys.pk = bn254::G2::generator() * keys.sk;
  keys.k_e = ke_material.bytes();
  keys.k_m = node::derive_mac_key(keys.k_e);
  store.cert = {keys.pk,
                bls_sign(TAG_CERT, secrets->msk, cert_message(store.identity, keys.pk))};
  store.kxr = node::key_exchange_export(keys, store.identity, store.cert);

  // firmware-analog blobs and the signed/MACed/encrypted chain over them
  store.chain = node::make_boot_chain_keys(rng);
  std::vector<Bytes> blobs;
  for (size_t i = 0; i < node::BOOT_PARTITION_NAMES.size(); i++) {
    Bytes blob(256 + 64 * i);
    Rng blob_rng = rng.child(node::BOOT_PARTITION_NAMES[i]);
    blob_rng.fill_bytes(blob);
    blobs.push_back(std::move(blob));
  }
  store.image = node::build_boot_image(blobs, store.chain);

  harness::save_node(cfg, store);
  std::cout << "node: enrolled " << id << " under " << (cfg.nodes_dir() / id).string() << "\n";
  return EXIT_ACCEPT;
}

std::vector<node::Frame> load_frame_stream(const std::string& synthetic,
                                           const std::string& frames_dir) {
  if (!synthetic.empty()) {
    uint32_t w = 0, h = 0, n = 0;
    if (sscanf(synthetic.c_str(), "%ux%u@%u", &w, &h, &n) != 3 || !w || !h || !n)
      throw std::runtime_error("node run: --synthetic expects WxH@N");
    return node::synthetic_sequence(w, h, n);
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(frames_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<node::Frame> frames;
  for (const auto& p : paths) {
    auto data = harness::read_file(p);
    auto frame = data ? node::parse_pgm(*data) : std::nullopt;
    if (!frame) throw std::runtime_error("node run: cannot parse " + p.string());
    frames.push_back(std::move(*frame));
  }
  return frames;
}

int cmd_node_run(const HarnessConfig& cfg, const std::string& id, const std::string& synthetic,
                 const std::string& frames_dir, double area_fraction) {
  auto store = harness::load_node(cfg, id);
  if (!store) {
    std::cerr << "node run: " << id << " not enrolled\n";
    return EXIT_REJECT;
  }
  std::vector<node::Frame> frames = load_frame_stream(synthetic, frames_dir);
  if (frames.size() < 3) {
    std::cerr << "node run: need at least 3 frames\n";
    return EXIT_USAGE;
  }

  uint64_t event_count = harness::next_event_count(cfg, id);
  RoPuf puf(ro_profile_fpga(store->device_seed));
  auto boot = node::node_boot(store->image, store->chain.k_mac, puf, store->w_sign, store->w_enc,
                              event_count);
  if (!boot.keys) {
    std::cerr << "node run: refused to start (" << boot.reason << ")\n";
    return EXIT_REJECT;
  }

  node::MotionParams params;
  params.area_fraction = area_fraction;
  bool event = false;
  for (size_t t = 2; t < frames.size() && !event; t++)
    event = node::detect_event(frames[t], frames[t - 1], frames[t - 2], params).event;
  if (!event) {
    std::cout << "node: no event detected, nothing archived\n";
    return EXIT_ACCEPT;
  }

  auto footage = node::protect_footage(*boot.keys, store->identity, event_count, frames);
  fs::path out = cfg.store_dir() / (id + "-" + std::to_string(event_count) + ".sftg");
  harness::write_file(out, footage.serialize());
  harness::write_file(out.string() + ".notify", as_bytes("upload-complete\n"));
  std::cout << "node: event " << event_count << ", footage " << out.string() << " ("
            << footage.n() << " frames)\n";
  return EXIT_ACCEPT;
}

int cmd_caretaker_verify(const HarnessConfig& cfg, const std::string& id,
                         const std::string& footage_path, const std::string& out_dir) {
  auto store = harness::load_node(cfg, id);
  auto bundle = harness::load_setup_bundle(cfg);
  if (!store || !bundle) {
    std::cerr << "caretaker: missing node store or ta bundle\n";
    return EXIT_REJECT;
  }
  auto data = harness::read_file(footage_path);
  if (!data) {
    std::cerr << "caretaker: cannot read " << footage_path << "\n";
    return EXIT_REJECT;
  }
  auto footage = node::ProtectedFootage::deserialize(*data);
  if (!footage) {
    std::cout << "verdict: reject: timestamp_malformed\n";
    return EXIT_REJECT;
  }

  // persistent caretaker replay cache
  BoundedReplayCache cache(cfg.replay_capacity);
  fs::path replay_path = cfg.nodes_dir() / id / "caretaker_replay.bin";
  if (auto replay = harness::read_file(replay_path)) {
    for (size_t pos = 0; pos + 32 <= replay->size(); pos += 32)
      cache.remember(std::span<const uint8_t>(replay->data() + pos, 32));
  }

  auto res = node::caretaker_verify_decrypt(store->kxr, bundle->mpk, *footage, cache);
  if (!res.frames) {
    std::cout << "verdict: reject: " << res.reason << "\n";
    return EXIT_REJECT;
  }

  Bytes replay_out;
  replay_out.insert(replay_out.end(), footage->tau.begin(), footage->tau.end());
  if (auto replay = harness::read_file(replay_path))
    replay_out.insert(replay_out.end(), replay->begin(), replay->end());
  harness::write_file(replay_path, replay_out);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (size_t i = 0; i < res.frames->size(); i++) {
      char name[32];
      snprintf(name, sizeof(name), "frame-%04zu.pgm", i);
      harness::write_file(fs::path(out_dir) / name, node::write_pgm((*res.frames)[i]));
    }
  }
  std::cout << "verdict: accept (" << res.frames->size() << " frames"
            << (out_dir.empty() ? "" : ", written to " + out_dir) << ")\n";
  return EXIT_ACCEPT;
}

// --------------------------------------------------------------- tables ---

int cmd_tables_sizes(const HarnessConfig&) {
  struct Row {
    const char* code;
    uint32_t key_bits;
    uint32_t w_expect, gates_expect;
  };
  const Row rows[] = {{"bch", 128, 1105, 1108},
                      {"rm_rep", 128, 2048, 2051},
                      {"bch", 160, 1381, 1384},
                      {"rm_rep", 160, 2560, 2563}};
  bool all_ok = true;
  printf("%-8s %-8s %-12s %-12s %-10s %-8s\n", "code", "key", "W bits", "gates (RO)", "ROs",
         "check");
  for (const auto& row : rows) {
    CodeParams code =
        std::string_view(row.code) == "bch" ? CodeParams::bch492() : CodeParams::rm_rep80();
    auto f = hda_footprint(code, row.key_bits);
    bool ok = f.helper_bits == row.w_expect && f.logic_gates == row.gates_expect;
    all_ok &= ok;
    printf("%-8s %-8u %5u (exp %4u) %5u (exp %4u) %-8u %s\n", row.code, row.key_bits,
           f.helper_bits, row.w_expect, f.logic_gates, row.gates_expect, f.num_ros,
           ok ? "OK" : "FAIL");
  }
  printf("(SRAM realizations store the same W; no gate overhead applies)\n");
  return all_ok ? EXIT_ACCEPT : EXIT_REJECT;
}

int cmd_tables_overhead(const HarnessConfig& cfg, uint32_t q, uint64_t payload) {
  bool all_ok = true;
  auto print_row = [&](uint32_t rq, uint64_t rpayload, long expect) {
    auto counts =
        niwi::element_counts(GroupConfig::Setting::asymmetric, rq, true, cfg.accounting_widths);
    auto actual = niwi::actual_element_counts(rq, cfg.accounting_widths);
    bool ok = expect < 0 || counts.bytes() == uint64_t(expect);
    all_ok &= ok;
    printf("Q=%-3u payload %-10llu overhead %4llu B (transmitted %4llu B)", rq,
           (unsigned long long)rpayload, (unsigned long long)counts.bytes(),
           (unsigned long long)actual.bytes());
    if (rpayload)
      printf("  fraction %.2e", double(counts.bytes()) / double(rpayload));
    printf("  %s\n", expect < 0 ? "" : (ok ? "OK" : "FAIL"));
  };
  printf("asymmetric aggregated reports at %u/%u-bit element widths:\n",
         cfg.accounting_widths.g1_bits, cfg.accounting_widths.g2_bits);
  print_row(1, 82, 400);
  print_row(2, 900 * 1024 + 82, 520);
  if (q) print_row(q, payload, -1);
  printf("symmetric element counts: per-reading 30Q vs aggregated 6Q+12\n");
  for (uint32_t sq : {1u, 2u, 4u}) {
    auto plain = niwi::element_counts(GroupConfig::Setting::symmetric, sq, false);
    auto agg = niwi::element_counts(GroupConfig::Setting::symmetric, sq, true);
    bool ok = plain.g_elems == 30 * sq && agg.g_elems == 6 * sq + 12;
    all_ok &= ok;
    printf("Q=%-3u %3u vs %3u elements of G  %s\n", sq, plain.g_elems, agg.g_elems,
           ok ? "OK" : "FAIL");
  }
  uint64_t node_bits = node::upload_overhead_bits(cfg.accounting_widths);
  bool node_ok = node_bits == 416;
  all_ok &= node_ok;
  printf("secure-node upload overhead: %llu bits (tau 256 + sigma %u)  %s\n",
         (unsigned long long)node_bits, cfg.accounting_widths.g1_bits, node_ok ? "OK" : "FAIL");
  return all_ok ? EXIT_ACCEPT : EXIT_REJECT;
}

int cmd_tables_puf(const HarnessConfig& cfg) {
  bool all_ok = true;
  auto check = [&](const char* name, double value, double target, double tol) {
    bool ok = std::abs(value - target) <= tol;
    all_ok &= ok;
    printf("%-28s %7.2f %% (target %5.2f +- %.1f)  %s\n", name, value, target, tol,
           ok ? "OK" : "FAIL");
    return ok;
  };

  {
    SramPuf puf(sram_profile_8bit(cfg.seed + 1));
    auto challenge = PufChallenge::sram_range(0, 1024);
    std::vector<PufResponse> samples;
    double hw = 0;
    for (uint64_t i = 0; i < 100; i++) {
      samples.push_back(puf.sample(challenge, i));
      hw += hamming_weight_pct(samples.back());
    }
    auto [mean, mx] = hd_intra_pct(puf.reference(challenge), samples);
    check("sram-8bit  mean HW", hw / 100, 63.5, 2.0);
    check("sram-8bit  mean HDintra", mean, 3.4, 1.0);
    printf("%-28s %7.2f %%\n", "sram-8bit  max HDintra", mx);
  }
  {
    SramPuf puf(sram_profile_32bit(cfg.seed + 2));
    auto challenge = PufChallenge::sram_range(0, 4096);
    std::vector<PufResponse> samples;
    double hw = 0;
    for (uint64_t i = 0; i < 100; i++) {
      samples.push_back(puf.sample(challenge, i));
      hw += hamming_weight_pct(samples.back());
    }
    auto [mean, mx] = hd_intra_pct(puf.reference(challenge), samples);
    check("sram-32bit mean HW", hw / 100, 63.96, 2.0);
    check("sram-32bit mean HDintra", mean, 7.66, 1.0);
    printf("%-28s %7.2f %%\n", "sram-32bit max HDintra", mx);
  }
  {
    RoPuf puf(ro_profile_fpga(cfg.seed + 3));
    auto challenge = PufChallenge::ro_sequential(1039);
    std::vector<PufResponse> samples;
    double hw = 0;
    for (uint64_t i = 0; i < 100; i++) {
      samples.push_back(puf.sample(challenge, i));
      hw += hamming_weight_pct(samples.back());
    }
    auto [mean, mx] = hd_intra_pct(puf.reference(challenge), samples);
    check("ro         mean HW", hw / 100, 53.95, 2.0);
    check("ro         mean HDintra", mean, 3.6, 1.0);
    printf("%-28s %7.2f %%  (response %zu bits)\n", "ro         max HDintra", mx,
           samples[0].bits.size());
    std::vector<PufResponse> devices;
    for (uint64_t dev = 0; dev < 10; dev++)
      devices.push_back(RoPuf(ro_profile_fpga(cfg.seed + 100 + dev)).sample(challenge, 0));
    check("ro         HDinter (10 dev)", hd_inter_pct(devices), 51.1, 3.0);
  }
  return all_ok ? EXIT_ACCEPT : EXIT_REJECT;
}

// ------------------------------------------------------------------ puf ---

int cmd_puf_sample(const HarnessConfig& cfg, const std::string& profile, uint32_t count,
                   const std::string& out_path) {
  std::vector<PufResponse> responses;
  if (profile == "ro") {
    RoPuf puf(ro_profile_fpga(cfg.seed));
    auto challenge = PufChallenge::ro_sequential(1039);
    for (uint64_t i = 0; i < count; i++) responses.push_back(puf.sample(challenge, i));
  } else if (profile == "sram32") {
    SramPuf puf(sram_profile_32bit(cfg.seed));
    auto challenge = PufChallenge::sram_range(0, 4096);
    for (uint64_t i = 0; i < count; i++) responses.push_back(puf.sample(challenge, i));
  } else {
    SramPuf puf(sram_profile_8bit(cfg.seed));
    auto challenge = PufChallenge::sram_range(0, 1024);
    for (uint64_t i = 0; i < count; i++) responses.push_back(puf.sample(challenge, i));
  }
  if (out_path.empty() || out_path == "-") {
    write_response_dump(std::cout, responses);
  } else {
    std::ofstream out(out_path);
    write_response_dump(out, responses);
    std::cout << "wrote " << responses.size() << " responses to " << out_path << "\n";
  }
  return EXIT_ACCEPT;
}

int cmd_puf_metrics(const std::string& dump_path) {
  std::ifstream in(dump_path);
  if (!in) {
    std::cerr << "puf metrics: cannot open " << dump_path << "\n";
    return EXIT_REJECT;
  }
  auto responses = read_response_dump(in);
  if (responses.empty()) {
    std::cerr << "puf metrics: empty dump\n";
    return EXIT_REJECT;
  }
  double hw = 0;
  for (const auto& r : responses) hw += hamming_weight_pct(r);
  printf("responses: %zu x %zu bits\n", responses.size(), responses[0].bits.size());
  printf("mean HW: %.2f %%\n", hw / double(responses.size()));
  if (responses.size() > 1) {
    std::span<const PufResponse> rest(responses.data() + 1, responses.size() - 1);
    auto [mean, mx] = hd_intra_pct(responses[0], rest);
    printf("HDintra vs first: mean %.2f %%, max %.2f %%\n", mean, mx);
    printf("pairwise HD: %.2f %%\n", hd_inter_pct(responses));
  }
  return EXIT_ACCEPT;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PUF-backed trusted sensing and secure camera node toolkit"};
  app.require_subcommand(1);

  std::string config_path, dir;
  uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--dir", dir, "state directory (default pufsense-data)");
  app.add_option("--seed", seed, "deterministic seed")->each([&](const std::string&) {
    have_seed = true;
  });

  std::string widths_spec;
  app.add_option("--group-widths", widths_spec, "accounting widths as G1:G2 bits (default 160:320)");

  // ta
  auto* ta = app.add_subcommand("ta", "trusted authority");
  auto* ta_setup_cmd = ta->add_subcommand("setup", "generate master keys and the proof CRS");
  std::string enroll_id;
  auto* ta_enroll_cmd = ta->add_subcommand("enroll", "enroll a sensor identity");
  ta_enroll_cmd->add_option("--id", enroll_id, "sensor identity")->required();
  std::string enroll_puf;
  ta_enroll_cmd->add_option("--puf", enroll_puf, "puf profile: sram8|sram32|ro");

  // report
  std::string sensors_csv, payloads_csv, report_out, transport = "file";
  bool tamper = false;
  uint64_t clock = 0;
  auto* report_cmd = app.add_subcommand("report", "attest, aggregate, prove and verify");
  report_cmd->add_option("--sensors", sensors_csv, "comma-separated sensor ids")->required();
  report_cmd->add_option("--payloads", payloads_csv, "per-sensor payloads (@file or literal)")
      ->required();
  report_cmd->add_option("--out", report_out, "write the serialized report here");
  report_cmd->add_flag("--tamper", tamper, "flip one byte before verification");
  report_cmd->add_option("--transport", transport, "file|socket (default file)");
  report_cmd->add_option("--clock", clock, "fixed wall-clock seconds (default: now)");

  // node
  auto* node_cmd = app.add_subcommand("node", "secure camera node");
  std::string node_id;
  auto* node_enroll_cmd = node_cmd->add_subcommand("enroll", "provision a camera");
  node_enroll_cmd->add_option("--id", node_id, "camera identity")->required();
  std::string run_id, synthetic, frames_dir;
  double area_fraction = 0.01;
  auto* node_run_cmd = node_cmd->add_subcommand("run", "boot, detect, protect, upload");
  node_run_cmd->add_option("--id", run_id, "camera identity")->required();
  node_run_cmd->add_option("--synthetic", synthetic, "WxH@N synthetic frame stream");
  node_run_cmd->add_option("--frames", frames_dir, "directory of .pgm frames");
  node_run_cmd->add_option("--event-threshold", area_fraction, "motion area fraction");

  // caretaker
  std::string caretaker_id, footage_path, frames_out;
  auto* caretaker_cmd = app.add_subcommand("caretaker", "verify and decrypt footage");
  auto* caretaker_verify_cmd = caretaker_cmd->add_subcommand("verify", "check one footage file");
  caretaker_verify_cmd->add_option("--id", caretaker_id, "camera identity")->required();
  caretaker_verify_cmd->add_option("--footage", footage_path, "footage container")->required();
  caretaker_verify_cmd->add_option("--out", frames_out, "directory for decrypted frames");

  // tables
  auto* tables_cmd = app.add_subcommand("tables", "reproduction tables");
  auto* tables_sizes = tables_cmd->add_subcommand("sizes", "helper-data and gate budget");
  auto* tables_overhead = tables_cmd->add_subcommand("overhead", "report overhead figures");
  uint32_t custom_q = 0;
  uint64_t custom_payload = 0;
  tables_overhead->add_option("--q", custom_q, "extra row: reading count");
  tables_overhead->add_option("--payload", custom_payload, "extra row: payload bytes");
  auto* tables_puf = tables_cmd->add_subcommand("puf", "simulated characterization stats");

  // puf
  auto* puf_cmd = app.add_subcommand("puf", "characterization dumps");
  std::string sample_profile = "sram8", sample_out = "-", metrics_dump;
  uint32_t sample_count = 100;
  auto* puf_sample = puf_cmd->add_subcommand("sample", "write a response dump");
  puf_sample->add_option("--profile", sample_profile, "sram8|sram32|ro");
  puf_sample->add_option("--count", sample_count, "number of responses");
  puf_sample->add_option("--out", sample_out, "output path or -");
  auto* puf_metrics = puf_cmd->add_subcommand("metrics", "metrics over a response dump");
  puf_metrics->add_option("--dump", metrics_dump, "response dump path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : EXIT_USAGE;
  }

  try {
    HarnessConfig cfg;
    if (!config_path.empty()) cfg = HarnessConfig::from_file(config_path);
    if (!dir.empty()) cfg.root = dir;
    if (have_seed) cfg.seed = seed;
    if (!enroll_puf.empty()) cfg.puf_profile = enroll_puf;
    if (!widths_spec.empty()) {
      uint32_t g1 = 0, g2 = 0;
      if (sscanf(widths_spec.c_str(), "%u:%u", &g1, &g2) != 2 || !g1 || !g2) {
        std::cerr << "--group-widths expects G1:G2\n";
        return EXIT_USAGE;
      }
      cfg.accounting_widths.g1_bits = g1;
      cfg.accounting_widths.g2_bits = g2;
    }

    if (ta_setup_cmd->parsed()) return cmd_ta_setup(cfg);
    if (ta_enroll_cmd->parsed()) return cmd_ta_enroll(cfg, enroll_id);
    if (report_cmd->parsed()) {
      if (clock == 0) clock = uint64_t(time(nullptr));
      return cmd_report(cfg, sensors_csv, payloads_csv, report_out, tamper, transport, clock);
    }
    if (node_enroll_cmd->parsed()) return cmd_node_enroll(cfg, node_id);
    if (node_run_cmd->parsed()) {
      if (synthetic.empty() == frames_dir.empty()) {
        std::cerr << "node run: pass exactly one of --synthetic / --frames\n";
        return EXIT_USAGE;
      }
      return cmd_node_run(cfg, run_id, synthetic, frames_dir, area_fraction);
    }
    if (caretaker_verify_cmd->parsed())
      return cmd_caretaker_verify(cfg, caretaker_id, footage_path, frames_out);
    if (tables_sizes->parsed()) return cmd_tables_sizes(cfg);
    if (tables_overhead->parsed()) return cmd_tables_overhead(cfg, custom_q, custom_payload);
    if (tables_puf->parsed()) return cmd_tables_puf(cfg);
    if (puf_sample->parsed()) return cmd_puf_sample(cfg, sample_profile, sample_count, sample_out);
    if (puf_metrics->parsed()) return cmd_puf_metrics(metrics_dump);

    std::cerr << "missing subcommand\n";
    return EXIT_USAGE;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_REJECT;
  }
}
