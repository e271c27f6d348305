#pragma once

#include <unistd.h>

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include <json.hpp>

#include "vmpc/dataset.hpp"
#include "vmpc/report.hpp"

namespace vmpc {

/// Public session settings, identical on both sides (checked at handshake
/// where wire-relevant).
struct SessionConfig {
  AlgoConfig algo;
  RingParams ring;
  NewtonConfig newton;
  TruncMode trunc_mode = TruncMode::local;
  int n = 0, k = 0;
  u64 session_id = 1;
  u64 dealer_seed = 1;
  u64 share_seed = 2;
  std::string host = "127.0.0.1";
  int port = 19777;
  std::string dealer_file_party1, dealer_file_party2;
  std::string input_party1, input_party2;
  std::string out_dir = ".";

  std::string dealer_file(PartyId p) const {
    return p == PartyId::p1 ? dealer_file_party1 : dealer_file_party2;
  }
  std::string input_file(PartyId p) const {
    return p == PartyId::p1 ? input_party1 : input_party2;
  }
};

// --- JSON round trip ---------------------------------------------------------

inline void to_json(nlohmann::json& j, const SessionConfig& c) {
  j = nlohmann::json{
      {"algorithm", to_string(c.algo.algorithm)},
      {"variant", variant_name(c.algo)},
      {"iters", c.algo.iters},
      {"eta", c.algo.eta},
      {"epsilon", c.algo.epsilon},
      {"q", c.ring.q},
      {"f", c.ring.f},
      {"newton",
       {{"inv_iters", c.newton.inv_iters},
        {"sqrt_iters", c.newton.sqrt_iters},
        {"b_inv", c.newton.b_inv},
        {"b_sqrt", c.newton.b_sqrt}}},
      {"trunc_mode", c.trunc_mode == TruncMode::dealer ? "dealer" : "local"},
      {"n", c.n},
      {"k", c.k},
      {"session_id", c.session_id},
      {"dealer_seed", c.dealer_seed},
      {"share_seed", c.share_seed},
      {"host", c.host},
      {"port", c.port},
      {"dealer_file_party1", c.dealer_file_party1},
      {"dealer_file_party2", c.dealer_file_party2},
      {"input_party1", c.input_party1},
      {"input_party2", c.input_party2},
      {"out_dir", c.out_dir}};
}

inline AlgoConfig algo_config_from(const std::string& algorithm, const std::string& variant) {
  AlgoConfig cfg;
  if (algorithm == "3est" || algorithm == "three_estimates") {
    cfg = variant == "h" ? three_estimates_h_config() : three_estimates_base_config();
  } else if (algorithm == "cosine") {
    cfg = variant == "fast" ? cosine_fast_config() : cosine_base_config();
  } else {
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  }
  return cfg;
}

inline void from_json(const nlohmann::json& j, SessionConfig& c) {
  c.algo = algo_config_from(j.at("algorithm").get<std::string>(),
                            j.value("variant", std::string("base")));
  c.algo.iters = j.value("iters", c.algo.iters);
  c.algo.eta = j.value("eta", c.algo.eta);
  c.algo.epsilon = j.value("epsilon", c.algo.epsilon);
  c.ring.q = j.value("q", c.ring.q);
  c.ring.f = j.value("f", c.ring.f);
  if (j.contains("newton")) {
    const auto& nj = j.at("newton");
    c.newton.inv_iters = nj.value("inv_iters", c.newton.inv_iters);
    c.newton.sqrt_iters = nj.value("sqrt_iters", c.newton.sqrt_iters);
    c.newton.b_inv = nj.value("b_inv", c.newton.b_inv);
    c.newton.b_sqrt = nj.value("b_sqrt", c.newton.b_sqrt);
  }
  c.trunc_mode =
      j.value("trunc_mode", std::string("local")) == "dealer" ? TruncMode::dealer
                                                              : TruncMode::local;
  c.n = j.value("n", 0);
  c.k = j.value("k", 0);
  c.session_id = j.value("session_id", u64{1});
  c.dealer_seed = j.value("dealer_seed", u64{1});
  c.share_seed = j.value("share_seed", u64{2});
  c.host = j.value("host", std::string("127.0.0.1"));
  c.port = j.value("port", 19777);
  c.dealer_file_party1 = j.value("dealer_file_party1", std::string());
  c.dealer_file_party2 = j.value("dealer_file_party2", std::string());
  c.input_party1 = j.value("input_party1", std::string());
  c.input_party2 = j.value("input_party2", std::string());
  c.out_dir = j.value("out_dir", std::string("."));
}

inline SessionConfig load_session_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  is >> j;
  return j.get<SessionConfig>();
}

inline void save_session_config(const std::filesystem::path& path, const SessionConfig& c) {
  std::ofstream os(path, std::ios::trunc);
  nlohmann::json j = c;
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Loopback deployment: both parties as strands of this process, in-memory
// dealer. Deterministic given (dataset, seeds, config).
// ---------------------------------------------------------------------------

struct LoopbackResult {
  TruthReport report;
  DealerBudget budget;
  DealerBudget consumed;
};

inline LoopbackResult run_mpc_loopback(const AnswerMatrix& m, const SessionConfig& cfg,
                                       const std::vector<std::int8_t>& truth = {}) {
  const Ring ring(cfg.ring);
  const auto t0 = std::chrono::steady_clock::now();

  DealerBudget budget = estimate_budget(cfg.algo, static_cast<u64>(m.n),
                                        static_cast<u64>(m.k),
                                        static_cast<u64>(cfg.algo.iters), cfg.ring,
                                        cfg.newton, cfg.trunc_mode);

  // Desk-scale budgets live in memory; anything bigger is streamed from
  // temporary material files so memory stays bounded.
  constexpr u64 kSpillRecords = 8u << 20;
  const bool spill = budget.total() > kSpillRecords;
  MaterialSet mat1, mat2;
  std::filesystem::path spill1, spill2;
  if (spill) {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() /
        ("vmpc_mat_" + std::to_string(cfg.session_id) + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    spill1 = dir / "party1.bin";
    spill2 = dir / "party2.bin";
    generate_material_files(ring, budget, cfg.dealer_seed, spill1, spill2);
  } else {
    std::tie(mat1, mat2) = generate_materials(ring, budget, cfg.dealer_seed);
  }

  SeededPrg share_prg(cfg.share_seed);
  auto [in1, in2] = share_answer_matrix(ring, m, share_prg);
  auto [ch1, ch2] = LoopbackChannel::make_pair();

  struct PartyOut {
    std::optional<ReconstructedState> released;
    ChannelStats channel;
    ProtoStats proto;
    double rounds_per_iteration = 0;
    DealerBudget consumed;
    std::exception_ptr error;
  };
  PartyOut out1, out2;

  auto party_main = [&](PartyId me, Channel& chan, MaterialSet mats,
                        const std::filesystem::path& spill_path,
                        const SharedAnswerMatrix& input, PartyOut& out) {
    try {
      std::unique_ptr<MaterialSource> src;
      if (spill)
        src = std::make_unique<MaterialFileReader>(spill_path, ring);
      else
        src = std::make_unique<MemoryMaterials>(ring.f(), std::move(mats));
      MpcContext ctx(me, chan, *src, ring, cfg.newton, cfg.trunc_mode);
      handshake(chan, ring, cfg.session_id);
      SharedTruthState st = run_mpc(ctx, input, cfg.algo);
      out.rounds_per_iteration = st.rounds_per_iteration();
      out.released = release(ctx, st);
      out.channel = chan.stats();
      out.proto = ctx.stats();
      out.consumed = src->consumed();
    } catch (...) {
      out.error = std::current_exception();
    }
  };

  std::thread t2(party_main, PartyId::p2, std::ref(*ch2), std::move(mat2), spill2,
                 std::cref(in2), std::ref(out2));
  party_main(PartyId::p1, *ch1, std::move(mat1), spill1, in1, out1);
  t2.join();
  if (spill) {
    std::error_code ec;
    std::filesystem::remove_all(spill1.parent_path(), ec);
  }
  if (out1.error) std::rethrow_exception(out1.error);
  if (out2.error) std::rethrow_exception(out2.error);

  TruthReport r;
  r.config = cfg.algo;
  r.mpc = true;
  r.ring_values = *out1.released;
  r.state = r.ring_values.decode(ring);
  r.labels = labels_of(r.state, cfg.algo);
  if (!truth.empty()) r.errors = count_label_errors(r.labels, truth);
  r.channel = out1.channel;
  r.proto = out1.proto;
  r.rounds_per_iteration = out1.rounds_per_iteration;
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  return {std::move(r), budget, out1.consumed};
}

// ---------------------------------------------------------------------------
// Two-process TCP deployment. Party 1 listens and doubles as the client;
// both parties persist their output shares.
// ---------------------------------------------------------------------------

inline std::optional<TruthReport> run_party_tcp(const SessionConfig& cfg, PartyId me) {
  const Ring ring(cfg.ring);
  const auto t0 = std::chrono::steady_clock::now();

  std::unique_ptr<TcpChannel> chan =
      me == PartyId::p1 ? TcpChannel::listen_and_accept(cfg.host, cfg.port)
                        : TcpChannel::connect(cfg.host, cfg.port);
  MaterialFileReader dealer(cfg.dealer_file(me), ring);
  SharedVector input = read_share_file(cfg.input_file(me), ring, me);
  if (input.size() != static_cast<size_t>(cfg.n) * static_cast<size_t>(cfg.k))
    throw std::runtime_error("input share file length does not match n*k");
  SharedAnswerMatrix m{me, cfg.n, cfg.k, std::move(input)};

  MpcContext ctx(me, *chan, dealer, ring, cfg.newton, cfg.trunc_mode);
  handshake(*chan, ring, cfg.session_id);
  SharedTruthState st = run_mpc(ctx, m, cfg.algo);
  std::optional<ReconstructedState> released = release(ctx, st);

  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);
  SharedVector mine = ctx.empty(0);
  for (const SharedVector* v : {&st.y, &st.theta, &st.delta})
    mine.values.insert(mine.values.end(), v->values.begin(), v->values.end());
  write_share_file(out_dir / ("result_party" + std::to_string(party_index(me)) + ".shr"),
                   ring, mine);

  if (me == PartyId::p2) return std::nullopt;

  TruthReport r;
  r.config = cfg.algo;
  r.mpc = true;
  r.ring_values = *released;
  r.state = r.ring_values.decode(ring);
  r.labels = labels_of(r.state, cfg.algo);
  r.channel = chan->stats();
  r.proto = ctx.stats();
  r.rounds_per_iteration = st.rounds_per_iteration();
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

// ---------------------------------------------------------------------------
// compare: plain and secure (loopback) on one dataset, plus the diff report.
// ---------------------------------------------------------------------------

struct CompareResult {
  TruthReport plain;
  TruthReport mpc;
  ErrorHistogram histogram;
  int label_flips = 0;
};

inline CompareResult compare_run(const Dataset& ds, const SessionConfig& cfg) {
  CompareResult out;
  out.plain = make_plain_report(ds.matrix, cfg.algo, ds.ground_truth);
  out.mpc = run_mpc_loopback(ds.matrix, cfg, ds.ground_truth).report;
  out.histogram = diff_histogram(out.plain.state, out.mpc.state);
  for (size_t j = 0; j < out.plain.labels.size(); j++)
    out.label_flips += out.plain.labels[j] != out.mpc.labels[j];
  return out;
}

inline void write_compare_bundle(const std::filesystem::path& dir, const Dataset& ds,
                                 const CompareResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plain");
  fs::create_directories(dir / "mpc");
  write_results_csv(dir / "plain" / "results.csv", res.plain);
  write_labels_csv(dir / "plain" / "labels.csv", res.plain, ds.fact_ids);
  write_results_csv(dir / "mpc" / "results.csv", res.mpc);
  write_labels_csv(dir / "mpc" / "labels.csv", res.mpc, ds.fact_ids);
  write_stats_csv(dir / "mpc" / "stats.csv", res.mpc);
  write_histogram_csv(dir / "histogram.csv", res.histogram);

  std::ofstream os(dir / "summary.txt", std::ios::trunc);
  os << "algorithm: " << to_string(res.plain.config.algorithm) << " ("
     << variant_name(res.plain.config) << "), iters " << res.plain.config.iters << "\n";
  os << "facts: " << res.plain.labels.size() << ", sources: " << res.plain.state.theta.size()
     << "\n";
  os << "max |mpc - plain|: " << res.histogram.max_abs << "\n";
  os << "label flips (mpc vs plain): " << res.label_flips << "\n";
  if (res.plain.errors)
    os << "plain label errors: " << *res.plain.errors << "\n";
  if (res.mpc.errors) os << "mpc label errors: " << *res.mpc.errors << "\n";
  os << "rounds: " << res.mpc.channel.rounds << " (" << res.mpc.rounds_per_iteration
     << " per iteration)\n";
  os << "bytes sent: " << res.mpc.channel.bytes_sent << "\n";
  os << "wall ms (mpc loopback): " << res.mpc.wall_ms << "\n";
}

// ---------------------------------------------------------------------------
// bench: sweep instance shapes and variants, one CSV row each.
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string algorithm, variant;
  int n = 0, k = 0, iters = 0;
  u64 rounds = 0, bytes_sent = 0;
  double rounds_per_iteration = 0, wall_ms = 0;
};

inline BenchRow bench_once(const AlgoConfig& algo, int n, int k, int iters,
                           const SessionConfig& base) {
  SessionConfig cfg = base;
  cfg.algo = algo;
  cfg.algo.iters = iters;
  cfg.n = n;
  cfg.k = k;
  Dataset ds = synthesize(make_synth_spec(base.share_seed ^ (static_cast<u64>(n) << 16 | k),
                                          n, k, 0.6, 0.95, 0.2));
  LoopbackResult res = run_mpc_loopback(ds.matrix, cfg, ds.ground_truth);
  BenchRow row;
  row.algorithm = to_string(algo.algorithm);
  row.variant = variant_name(algo);
  row.n = n;
  row.k = k;
  row.iters = iters;
  row.rounds = res.report.channel.rounds;
  row.bytes_sent = res.report.channel.bytes_sent;
  row.rounds_per_iteration = res.report.rounds_per_iteration;
  row.wall_ms = res.report.wall_ms;
  return row;
}

inline void write_bench_csv(const std::filesystem::path& path,
                            const std::vector<BenchRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  os << "algorithm,variant,n,k,iters,rounds,rounds_per_iteration,bytes_sent,wall_ms\n";
  for (const BenchRow& r : rows)
    os << r.algorithm << ',' << r.variant << ',' << r.n << ',' << r.k << ',' << r.iters
       << ',' << r.rounds << ',' << detail::fmt_value(r.rounds_per_iteration) << ','
       << r.bytes_sent << ',' << detail::fmt_value(r.wall_ms) << '\n';
}

}  // namespace vmpc
