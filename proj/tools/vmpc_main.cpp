// vmpc: two-party secret-sharing MPC runner for the Cosine and 3-Estimates
// truth-finding algorithms. See README.md for the deployment story.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "vmpc/session.hpp"

namespace fs = std::filesystem;
using namespace vmpc;

namespace {

struct CommonArgs {
  std::string algo = "3est";
  std::string variant = "base";
  int iters = 20;
  int q = 60, f = 20;
  u64 seed = 1;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--algo", a.algo, "algorithm: 3est | cosine");
  cmd->add_option("--variant", a.variant, "3est: base|h, cosine: base|fast");
  cmd->add_option("--iters", a.iters, "iteration count");
  cmd->add_option("--q", a.q, "ring bit width");
  cmd->add_option("--f", a.f, "fractional bits");
  cmd->add_option("--seed", a.seed, "master seed (dealer/share streams derive from it)");
  cmd->add_option("--out-dir", a.out_dir, "output directory");
}

SessionConfig session_from(const CommonArgs& a, int n, int k) {
  SessionConfig cfg;
  cfg.algo = algo_config_from(a.algo, a.variant);
  cfg.algo.iters = a.iters;
  cfg.ring = {a.q, a.f};
  cfg.n = n;
  cfg.k = k;
  cfg.dealer_seed = SeededPrg::derive(a.seed, 1);
  cfg.share_seed = SeededPrg::derive(a.seed, 2);
  cfg.session_id = SeededPrg::derive(a.seed, 3) & cfg.ring.mask();
  cfg.out_dir = a.out_dir;
  return cfg;
}

Dataset load_dataset(const std::string& answers, const std::string& truth) {
  Dataset ds = load_answer_csv(answers);
  if (!truth.empty()) load_truth_csv(truth, ds);
  return ds;
}

void print_report_line(const TruthReport& r) {
  std::cout << to_string(r.config.algorithm) << " (" << variant_name(r.config)
            << "), iters " << r.config.iters << ": " << r.labels.size() << " facts";
  if (r.errors) std::cout << ", " << *r.errors << " label errors";
  if (r.mpc)
    std::cout << ", " << r.channel.rounds << " rounds ("
              << r.rounds_per_iteration << "/iteration), " << r.channel.bytes_sent
              << " bytes sent";
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-party MPC truth finding"};
  app.require_subcommand(1);

  // dealer gen
  auto* dealer = app.add_subcommand("dealer", "trusted-dealer offline phase");
  dealer->require_subcommand(1);
  auto* gen = dealer->add_subcommand("gen", "generate material files for both parties");
  CommonArgs gen_args;
  int gen_n = 0, gen_k = 0;
  std::string gen_trunc = "local";
  add_common(gen, gen_args);
  gen->add_option("--n", gen_n, "source count")->required();
  gen->add_option("--k", gen_k, "fact count")->required();
  gen->add_option("--trunc-mode", gen_trunc, "local | dealer");

  // share-input
  auto* share = app.add_subcommand("share-input", "split a dataset into share files");
  std::string share_dataset;
  CommonArgs share_args;
  add_common(share, share_args);
  share->add_option("--dataset", share_dataset, "answer CSV")->required();

  // party
  auto* party = app.add_subcommand("party", "run one computing server over TCP");
  int party_id = 0;
  std::string party_config, party_host;
  int party_port = 0;
  party->add_option("--id", party_id, "party id, 1 or 2")->required();
  party->add_option("--config", party_config, "session config JSON")->required();
  party->add_option("--host", party_host, "override config host");
  party->add_option("--port", party_port, "override config port");

  // run-plain
  auto* plain = app.add_subcommand("run-plain", "cleartext baseline run");
  std::string plain_dataset, plain_truth;
  CommonArgs plain_args;
  add_common(plain, plain_args);
  plain->add_option("--dataset", plain_dataset, "answer CSV")->required();
  plain->add_option("--ground-truth", plain_truth, "ground-truth CSV");

  // run-mpc
  auto* mpc = app.add_subcommand("run-mpc", "secure run on the loopback transport");
  std::string mpc_dataset, mpc_truth, mpc_trunc = "local";
  CommonArgs mpc_args;
  add_common(mpc, mpc_args);
  mpc->add_option("--dataset", mpc_dataset, "answer CSV")->required();
  mpc->add_option("--ground-truth", mpc_truth, "ground-truth CSV");
  mpc->add_option("--trunc-mode", mpc_trunc, "local | dealer");

  // compare
  auto* cmp = app.add_subcommand("compare", "plain vs secure on one dataset");
  std::string cmp_dataset, cmp_truth;
  CommonArgs cmp_args;
  add_common(cmp, cmp_args);
  cmp->add_option("--dataset", cmp_dataset, "answer CSV")->required();
  cmp->add_option("--ground-truth", cmp_truth, "ground-truth CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "sweep sizes and variants, emit cost CSV");
  std::string bench_sizes = "10x20,30x60";
  std::string bench_algos = "3est:base,3est:h,cosine:base,cosine:fast";
  CommonArgs bench_args;
  bench_args.iters = 3;
  add_common(bench, bench_args);
  bench->add_option("--sizes", bench_sizes, "comma-separated NxK list");
  bench->add_option("--algos", bench_algos, "comma-separated algo:variant list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      SessionConfig cfg = session_from(gen_args, gen_n, gen_k);
      cfg.trunc_mode = gen_trunc == "dealer" ? TruncMode::dealer : TruncMode::local;
      Ring ring(cfg.ring);
      DealerBudget b = estimate_budget(cfg.algo, static_cast<u64>(gen_n),
                                       static_cast<u64>(gen_k),
                                       static_cast<u64>(cfg.algo.iters), cfg.ring,
                                       cfg.newton, cfg.trunc_mode);
      fs::create_directories(gen_args.out_dir);
      fs::path p1 = fs::path(gen_args.out_dir) / "dealer_party1.bin";
      fs::path p2 = fs::path(gen_args.out_dir) / "dealer_party2.bin";
      generate_material_files(ring, b, cfg.dealer_seed, p1, p2);
      std::cout << "budget: " << b.triples << " triples, " << b.bits << " bits, "
                << b.pairs_f << "+" << b.pairs_f1 << " truncation pairs\n"
                << p1.string() << "\n" << p2.string() << "\n";
    } else if (share->parsed()) {
      Dataset ds = load_dataset(share_dataset, "");
      Ring ring({share_args.q, share_args.f});
      SeededPrg prg(SeededPrg::derive(share_args.seed, 2));
      auto [s1, s2] = share_answer_matrix(ring, ds.matrix, prg);
      fs::create_directories(share_args.out_dir);
      fs::path p1 = fs::path(share_args.out_dir) / "input_party1.shr";
      fs::path p2 = fs::path(share_args.out_dir) / "input_party2.shr";
      write_share_file(p1, ring, s1.flat);
      write_share_file(p2, ring, s2.flat);
      std::cout << "n " << ds.matrix.n << " k " << ds.matrix.k << "\n"
                << p1.string() << "\n" << p2.string() << "\n";
    } else if (party->parsed()) {
      if (party_id != 1 && party_id != 2)
        throw std::invalid_argument("party --id must be 1 or 2");
      SessionConfig cfg = load_session_config(party_config);
      if (!party_host.empty()) cfg.host = party_host;
      if (party_port != 0) cfg.port = party_port;
      PartyId me = party_id == 1 ? PartyId::p1 : PartyId::p2;
      std::optional<TruthReport> r = run_party_tcp(cfg, me);
      if (r) {
        fs::path dir(cfg.out_dir);
        write_results_csv(dir / "results.csv", *r);
        write_stats_csv(dir / "stats.csv", *r);
        print_report_line(*r);
      } else {
        std::cout << "party 2 done, shares released\n";
      }
    } else if (plain->parsed()) {
      Dataset ds = load_dataset(plain_dataset, plain_truth);
      AlgoConfig a = algo_config_from(plain_args.algo, plain_args.variant);
      a.iters = plain_args.iters;
      TruthReport r = make_plain_report(ds.matrix, a, ds.ground_truth);
      fs::create_directories(plain_args.out_dir);
      write_results_csv(fs::path(plain_args.out_dir) / "results.csv", r);
      write_labels_csv(fs::path(plain_args.out_dir) / "labels.csv", r, ds.fact_ids);
      print_report_line(r);
    } else if (mpc->parsed()) {
      Dataset ds = load_dataset(mpc_dataset, mpc_truth);
      SessionConfig cfg = session_from(mpc_args, ds.matrix.n, ds.matrix.k);
      cfg.trunc_mode = mpc_trunc == "dealer" ? TruncMode::dealer : TruncMode::local;
      LoopbackResult res = run_mpc_loopback(ds.matrix, cfg, ds.ground_truth);
      fs::create_directories(mpc_args.out_dir);
      write_results_csv(fs::path(mpc_args.out_dir) / "results.csv", res.report);
      write_stats_csv(fs::path(mpc_args.out_dir) / "stats.csv", res.report);
      write_labels_csv(fs::path(mpc_args.out_dir) / "labels.csv", res.report, ds.fact_ids);
      print_report_line(res.report);
    } else if (cmp->parsed()) {
      Dataset ds = load_dataset(cmp_dataset, cmp_truth);
      SessionConfig cfg = session_from(cmp_args, ds.matrix.n, ds.matrix.k);
      CompareResult res = compare_run(ds, cfg);
      write_compare_bundle(cmp_args.out_dir, ds, res);
      std::cout << "max |mpc - plain| " << res.histogram.max_abs << ", label flips "
                << res.label_flips << "\n";
      print_report_line(res.plain);
      print_report_line(res.mpc);
    } else if (bench->parsed()) {
      SessionConfig base = session_from(bench_args, 0, 0);
      std::vector<BenchRow> rows;
      std::stringstream algos(bench_algos);
      std::string item;
      std::vector<AlgoConfig> cfgs;
      while (std::getline(algos, item, ',')) {
        auto colon = item.find(':');
        cfgs.push_back(algo_config_from(item.substr(0, colon),
                                        colon == std::string::npos
                                            ? "base"
                                            : item.substr(colon + 1)));
      }
      std::stringstream sizes(bench_sizes);
      while (std::getline(sizes, item, ',')) {
        auto x = item.find('x');
        if (x == std::string::npos) throw std::invalid_argument("bad --sizes item: " + item);
        int n = std::stoi(item.substr(0, x)), k = std::stoi(item.substr(x + 1));
        for (const AlgoConfig& a : cfgs) {
          rows.push_back(bench_once(a, n, k, bench_args.iters, base));
          const BenchRow& r = rows.back();
          std::cout << r.algorithm << ":" << r.variant << " " << n << "x" << k << " -> "
                    << r.rounds << " rounds, " << r.rounds_per_iteration
                    << "/iteration, " << r.bytes_sent << " bytes\n";
        }
      }
      fs::create_directories(bench_args.out_dir);
      write_bench_csv(fs::path(bench_args.out_dir) / "bench.csv", rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
