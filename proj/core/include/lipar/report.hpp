#pragma once

// JSON and CSV emission for module reports. Every JSON document starts with
// a "schema" field ("lipar.<kind>/<version>") followed by the report fields
// in declaration order. parse_report reads a document back and rejects a
// wrong schema, unknown keys, and missing fields.

#include <string>
#include <string_view>
#include <vector>

#include "lipar/latency.hpp"
#include "lipar/noise_stats.hpp"
#include "lipar/pipeline.hpp"
#include "lipar/recovery_bench.hpp"
#include "lipar/redundancy.hpp"
#include "lipar/stats.hpp"

namespace lipar {

inline constexpr int kReportSchemaVersion = 1;

struct PruneSummary {
  int frames = 0;
  int rows = 0;
  int cols = 0;
  std::size_t tokens = 0;
  std::size_t kept_tokens = 0;
  double prune_rate = 0.0;
  std::vector<double> prune_rate_per_frame;

  bool operator==(const PruneSummary&) const = default;
};
PruneSummary summarize_mask(const KeepMaskSequence& mask);

/// Both cases of the quadratic-form experiment.
struct MomentPair {
  MomentReport independent;
  MomentReport duplicated;

  bool operator==(const MomentPair&) const = default;
};

struct CompressionSweepReport {
  std::vector<CompressionReport> reports;

  bool operator==(const CompressionSweepReport&) const = default;
};

struct AggregationReport {
  AggregationSweep independent;
  AggregationSweep duplicated;

  bool operator==(const AggregationReport&) const = default;
};

std::string to_json(const PearsonReport& r);
std::string to_json(const CompressionSweepReport& r);
std::string to_json(const PruneSummary& r);
std::string to_json(const RecoveryErrorReport& r);
std::string to_json(const MomentPair& r);
std::string to_json(const AggregationReport& r);
std::string to_json(const PipelineStats& r);
std::string to_json(const LatencyCurve& r);

/// Header `kept_fraction,mean_ms,std_ms`, one row per sample.
std::string latency_csv(const LatencyCurve& curve);

/// Throws FormatError on malformed JSON, a schema mismatch, unknown keys,
/// or missing fields.
template <typename Report>
Report parse_report(std::string_view json);

}  // namespace lipar
