#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vmpc/config.hpp"
#include "vmpc/transport.hpp"
#include "vmpc/truthfind.hpp"
#include "vmpc/truthfind_mpc.hpp"

namespace vmpc {

/// Outcome of one plain or secure run.
struct TruthReport {
  AlgoConfig config;
  bool mpc = false;
  TruthState state;
  std::vector<std::int8_t> labels;
  std::optional<int> errors;  // vs ground truth, when available

  // Secure runs only.
  ReconstructedState ring_values;
  ChannelStats channel;
  ProtoStats proto;
  double rounds_per_iteration = 0.0;
  double wall_ms = 0.0;
};

inline TruthReport make_plain_report(const AnswerMatrix& m, const AlgoConfig& cfg,
                                     const std::vector<std::int8_t>& truth) {
  TruthReport r;
  r.config = cfg;
  r.state = run_plain(m, cfg);
  r.labels = labels_of(r.state, cfg);
  if (!truth.empty()) r.errors = count_label_errors(r.labels, truth);
  return r;
}

namespace detail {

inline std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt_hex(u64 v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

/// results.csv: kind,index,value[,ring_hex]. Ring words are included for
/// secure runs so transport equivalence can be checked bit by bit.
inline void write_results_csv(const std::filesystem::path& path, const TruthReport& r) {
  std::ofstream os(path, std::ios::trunc);
  os << (r.mpc ? "kind,index,value,ring_hex\n" : "kind,index,value\n");
  auto dump = [&](const char* kind, const std::vector<double>& vals,
                  const std::vector<RingElement>& ring) {
    for (size_t i = 0; i < vals.size(); i++) {
      os << kind << ',' << i << ',' << detail::fmt_value(vals[i]);
      if (r.mpc) os << ',' << detail::fmt_hex(ring[i].v);
      os << '\n';
    }
  };
  dump("y", r.state.y, r.ring_values.y);
  dump("theta", r.state.theta, r.ring_values.theta);
  dump("delta", r.state.delta, r.ring_values.delta);
}

inline void write_labels_csv(const std::filesystem::path& path, const TruthReport& r,
                             const std::vector<std::string>& fact_ids) {
  std::ofstream os(path, std::ios::trunc);
  os << "fact_id,label\n";
  for (size_t j = 0; j < r.labels.size(); j++)
    os << fact_ids[j] << ',' << static_cast<int>(r.labels[j]) << '\n';
}

inline void write_stats_csv(const std::filesystem::path& path, const TruthReport& r) {
  std::ofstream os(path, std::ios::trunc);
  os << "rounds,bytes_sent,bytes_received,opens,ltz_elements,sign_elements,"
        "rounds_per_iteration\n";
  os << r.channel.rounds << ',' << r.channel.bytes_sent << ',' << r.channel.bytes_received
     << ',' << r.channel.opens << ',' << r.proto.ltz_elements << ','
     << r.proto.sign_elements << ',' << detail::fmt_value(r.rounds_per_iteration) << '\n';
}

// ---------------------------------------------------------------------------
// |secure - plain| error histogram, decade buckets from 1e-8 to 1e-1.
// ---------------------------------------------------------------------------

struct ErrorHistogram {
  // Buckets: <=1e-8, (1e-8,1e-7], ..., (1e-2,1e-1], >1e-1.
  static constexpr int kBuckets = 9;
  std::array<std::vector<u64>, 3> counts;  // per kind: y, theta, delta
  double max_abs = 0.0;

  static int bucket_of(double x) {
    double edge = 1e-8;
    for (int b = 0; b < kBuckets - 1; b++, edge *= 10.0)
      if (x <= edge) return b;
    return kBuckets - 1;
  }

  static std::string bucket_label(int b) {
    static const char* kLabels[kBuckets] = {
        "<=1e-08",          "(1e-08,1e-07]", "(1e-07,1e-06]", "(1e-06,1e-05]",
        "(1e-05,1e-04]",    "(1e-04,1e-03]", "(1e-03,1e-02]", "(1e-02,1e-01]",
        ">1e-01"};
    return kLabels[b];
  }
};

inline ErrorHistogram diff_histogram(const TruthState& plain, const TruthState& mpc) {
  ErrorHistogram h;
  const std::vector<double>* pv[3] = {&plain.y, &plain.theta, &plain.delta};
  const std::vector<double>* mv[3] = {&mpc.y, &mpc.theta, &mpc.delta};
  for (int kind = 0; kind < 3; kind++) {
    h.counts[kind].assign(ErrorHistogram::kBuckets, 0);
    for (size_t i = 0; i < pv[kind]->size(); i++) {
      double d = std::fabs((*pv[kind])[i] - (*mv[kind])[i]);
      h.max_abs = std::max(h.max_abs, d);
      h.counts[kind][static_cast<size_t>(ErrorHistogram::bucket_of(d))]++;
    }
  }
  return h;
}

inline void write_histogram_csv(const std::filesystem::path& path,
                                const ErrorHistogram& h) {
  std::ofstream os(path, std::ios::trunc);
  os << "kind,bucket,count\n";
  const char* kinds[3] = {"y", "theta", "delta"};
  for (int kind = 0; kind < 3; kind++)
    for (int b = 0; b < ErrorHistogram::kBuckets; b++)
      os << kinds[kind] << ',' << ErrorHistogram::bucket_label(b) << ','
         << h.counts[kind][static_cast<size_t>(b)] << '\n';
}

}  // namespace vmpc
