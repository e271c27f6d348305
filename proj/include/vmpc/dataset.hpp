#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vmpc/prg.hpp"
#include "vmpc/truthfind.hpp"

namespace vmpc {

/// Answer matrix plus the id dictionaries built at load time (dense indices
/// in first-appearance order).
struct Dataset {
  AnswerMatrix matrix;
  std::vector<std::string> source_ids;
  std::vector<std::string> fact_ids;
  std::vector<std::int8_t> ground_truth;  // empty when not provided

  bool has_truth() const { return !ground_truth.empty(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

[[noreturn]] inline void parse_fail(const std::filesystem::path& p, int line,
                                    const std::string& what) {
  throw std::runtime_error(p.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// Loads the answer CSV (header "source_id,fact_id,answer", answers in
/// {-1,0,1}; absent pairs are abstentions) and validates the matrix.
inline Dataset load_answer_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open dataset: " + path.string());

  std::string line;
  int lineno = 1;
  if (!std::getline(is, line) || detail::strip_cr(line) != "source_id,fact_id,answer")
    detail::parse_fail(path, 1, "expected header \"source_id,fact_id,answer\"");

  Dataset ds;
  std::map<std::string, int> src_index, fact_index;
  struct Entry {
    int i, j, line;
    std::int8_t v;
  };
  std::vector<Entry> entries;

  while (std::getline(is, line)) {
    lineno++;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) detail::parse_fail(path, lineno, "expected 3 fields");
    int v;
    try {
      size_t used = 0;
      v = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("");
    } catch (...) {
      detail::parse_fail(path, lineno, "answer is not an integer: " + fields[2]);
    }
    if (v < -1 || v > 1)
      detail::parse_fail(path, lineno, "answer must be -1, 0 or 1, got " + fields[2]);

    auto intern = [](std::map<std::string, int>& idx, std::vector<std::string>& names,
                     const std::string& id) {
      auto [it, fresh] = idx.try_emplace(id, static_cast<int>(names.size()));
      if (fresh) names.push_back(id);
      return it->second;
    };
    int i = intern(src_index, ds.source_ids, fields[0]);
    int j = intern(fact_index, ds.fact_ids, fields[1]);
    entries.push_back({i, j, lineno, static_cast<std::int8_t>(v)});
  }
  if (entries.empty()) detail::parse_fail(path, lineno, "no data rows");

  ds.matrix = AnswerMatrix::zeros(static_cast<int>(ds.source_ids.size()),
                                  static_cast<int>(ds.fact_ids.size()));
  std::vector<bool> seen(ds.matrix.a.size(), false);
  for (const Entry& e : entries) {
    size_t idx = static_cast<size_t>(e.i) * ds.matrix.k + e.j;
    if (seen[idx])
      detail::parse_fail(path, e.line, "duplicate (source, fact) pair");
    seen[idx] = true;
    ds.matrix.set(e.i, e.j, e.v);
  }
  ds.matrix.validate();
  return ds;
}

/// Ground-truth CSV: header "fact_id,label", labels in {-1,1}, one row per
/// fact of the already-loaded dataset.
inline void load_truth_csv(const std::filesystem::path& path, Dataset& ds) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open ground truth: " + path.string());
  std::map<std::string, int> fact_index;
  for (size_t j = 0; j < ds.fact_ids.size(); j++)
    fact_index[ds.fact_ids[j]] = static_cast<int>(j);

  std::string line;
  int lineno = 1;
  if (!std::getline(is, line) || detail::strip_cr(line) != "fact_id,label")
    detail::parse_fail(path, 1, "expected header \"fact_id,label\"");

  std::vector<std::int8_t> truth(ds.fact_ids.size(), 0);
  std::vector<bool> have(ds.fact_ids.size(), false);
  while (std::getline(is, line)) {
    lineno++;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) detail::parse_fail(path, lineno, "expected 2 fields");
    auto it = fact_index.find(fields[0]);
    if (it == fact_index.end())
      detail::parse_fail(path, lineno, "unknown fact id: " + fields[0]);
    if (fields[1] != "1" && fields[1] != "-1")
      detail::parse_fail(path, lineno, "label must be -1 or 1");
    if (have[static_cast<size_t>(it->second)])
      detail::parse_fail(path, lineno, "duplicate fact id");
    have[static_cast<size_t>(it->second)] = true;
    truth[static_cast<size_t>(it->second)] =
        static_cast<std::int8_t>(fields[1] == "1" ? 1 : -1);
  }
  for (size_t j = 0; j < have.size(); j++)
    if (!have[j]) throw std::runtime_error("ground truth missing fact " + ds.fact_ids[j]);
  ds.ground_truth = std::move(truth);
}

inline void write_answer_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::trunc);
  os << "source_id,fact_id,answer\n";
  for (int i = 0; i < ds.matrix.n; i++)
    for (int j = 0; j < ds.matrix.k; j++)
      if (ds.matrix.at(i, j) != 0)
        os << ds.source_ids[static_cast<size_t>(i)] << ','
           << ds.fact_ids[static_cast<size_t>(j)] << ','
           << static_cast<int>(ds.matrix.at(i, j)) << '\n';
}

inline void write_truth_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::trunc);
  os << "fact_id,label\n";
  for (int j = 0; j < ds.matrix.k; j++)
    os << ds.fact_ids[static_cast<size_t>(j)] << ','
       << static_cast<int>(ds.ground_truth[static_cast<size_t>(j)]) << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic instances: each source answers correctly with its own
// probability, abstains with a common probability; the hidden truth is
// supplied or drawn from the seed. Deterministic given the spec.
// ---------------------------------------------------------------------------

struct SynthSpec {
  u64 seed = 1;
  int n = 10, k = 20;
  std::vector<double> correctness;   // per source; uniform fill helper below
  double abstain = 0.2;
  std::vector<std::int8_t> truth;    // optional; drawn from seed when empty

  void validate() const {
    if (n <= 0 || k <= 0) throw std::invalid_argument("synth: sizes must be positive");
    if (static_cast<int>(correctness.size()) != n)
      throw std::invalid_argument("synth: need one correctness probability per source");
    for (double p : correctness)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("synth: probabilities must be in [0,1]");
    if (!(abstain >= 0.0 && abstain < 1.0))
      throw std::invalid_argument("synth: abstain probability must be in [0,1)");
    if (!truth.empty() && static_cast<int>(truth.size()) != k)
      throw std::invalid_argument("synth: truth length mismatch");
  }
};

inline SynthSpec make_synth_spec(u64 seed, int n, int k, double p_lo, double p_hi,
                                 double abstain) {
  SynthSpec s;
  s.seed = seed;
  s.n = n;
  s.k = k;
  s.abstain = abstain;
  SeededPrg prg(SeededPrg::derive(seed, 0x70726f62));
  s.correctness.resize(static_cast<size_t>(n));
  for (double& p : s.correctness) p = p_lo + (p_hi - p_lo) * prg.next_unit();
  return s;
}

inline Dataset synthesize(const SynthSpec& spec) {
  spec.validate();
  SeededPrg prg(spec.seed);

  Dataset ds;
  ds.ground_truth = spec.truth;
  if (ds.ground_truth.empty()) {
    ds.ground_truth.resize(static_cast<size_t>(spec.k));
    for (auto& t : ds.ground_truth) t = prg.next_bit() ? 1 : -1;
  }

  ds.matrix = AnswerMatrix::zeros(spec.n, spec.k);
  auto draw_answer = [&](int i, int j) -> std::int8_t {
    if (prg.next_unit() < spec.abstain) return 0;
    std::int8_t t = ds.ground_truth[static_cast<size_t>(j)];
    return prg.next_unit() < spec.correctness[static_cast<size_t>(i)]
               ? t
               : static_cast<std::int8_t>(-t);
  };
  for (int j = 0; j < spec.k; j++) {
    for (int attempt = 0;; attempt++) {
      bool any = false;
      for (int i = 0; i < spec.n; i++) {
        std::int8_t v = draw_answer(i, j);
        ds.matrix.set(i, j, v);
        any |= v != 0;
      }
      if (any) break;
      if (attempt >= 1000) {  // can only loop with abstain near 1
        ds.matrix.set(0, j, ds.ground_truth[static_cast<size_t>(j)]);
        break;
      }
    }
  }
  // A fully-abstaining source cannot happen for the specs used in practice,
  // but keep the matrix invariant unconditional.
  for (int i = 0; i < spec.n; i++) {
    bool any = false;
    for (int j = 0; j < spec.k; j++) any |= ds.matrix.at(i, j) != 0;
    if (!any) ds.matrix.set(i, 0, ds.ground_truth[0]);
  }

  ds.source_ids.resize(static_cast<size_t>(spec.n));
  for (int i = 0; i < spec.n; i++) ds.source_ids[static_cast<size_t>(i)] = "s" + std::to_string(i);
  ds.fact_ids.resize(static_cast<size_t>(spec.k));
  for (int j = 0; j < spec.k; j++) ds.fact_ids[static_cast<size_t>(j)] = "f" + std::to_string(j);
  return ds;
}

}  // namespace vmpc
