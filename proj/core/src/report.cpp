#include "lipar/report.hpp"

#include <cstdio>
#include <set>

#include "json.hpp"

namespace lipar {
namespace {

using Json = nlohmann::ordered_json;

std::string schema_name(std::string_view kind) {
  return "lipar." + std::string(kind) + "/" + std::to_string(kReportSchemaVersion);
}

Json document(std::string_view kind) {
  Json j;
  j["schema"] = schema_name(kind);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Reads fields out of an object and checks that every key was consumed.
class Reader {
 public:
  Reader(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw FormatError(what_ + ": expected a JSON object");
  }

  template <typename T>
  T get(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw FormatError(what_ + ": missing field '" + key + "'");
    try {
      return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(what_ + ": field '" + key + "': " + e.what());
    }
  }

  const Json& child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw FormatError(what_ + ": missing field '" + key + "'");
    return *it;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw FormatError(what_ + ": unknown field '" + item.key() + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string what_;
  std::set<std::string, std::less<>> seen_;
};

Json parse_document(std::string_view text, std::string_view kind) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) {
    throw FormatError("report: missing schema field");
  }
  const auto expected = schema_name(kind);
  if (j["schema"].get<std::string>() != expected) {
    throw FormatError("report: schema '" + j["schema"].get<std::string>() + "', expected '" +
                      expected + "'");
  }
  return j;
}

Json moment_json(const MomentReport& m) {
  return Json{{"n_samples", m.n_samples},
              {"mean", m.mean},
              {"variance", m.variance},
              {"target_mean", m.target_mean},
              {"target_variance", m.target_variance},
              {"mean_stderr", m.mean_stderr},
              {"mean_z", m.mean_z},
              {"mean_rel_dev", m.mean_rel_dev},
              {"variance_rel_dev", m.variance_rel_dev}};
}

MomentReport moment_from(const Json& j, const std::string& what) {
  Reader r(j, what);
  MomentReport m;
  m.n_samples = r.get<std::size_t>("n_samples");
  m.mean = r.get<double>("mean");
  m.variance = r.get<double>("variance");
  m.target_mean = r.get<double>("target_mean");
  m.target_variance = r.get<double>("target_variance");
  m.mean_stderr = r.get<double>("mean_stderr");
  m.mean_z = r.get<double>("mean_z");
  m.mean_rel_dev = r.get<double>("mean_rel_dev");
  m.variance_rel_dev = r.get<double>("variance_rel_dev");
  r.finish();
  return m;
}

Json sweep_json(const AggregationSweep& s) {
  return Json{{"duplicated", s.duplicated},
              {"n", s.n},
              {"variance", s.variance},
              {"exponent", s.exponent},
              {"intercept", s.intercept}};
}

AggregationSweep sweep_from(const Json& j, const std::string& what) {
  Reader r(j, what);
  AggregationSweep s;
  s.duplicated = r.get<bool>("duplicated");
  s.n = r.get<std::vector<int>>("n");
  s.variance = r.get<std::vector<double>>("variance");
  s.exponent = r.get<double>("exponent");
  s.intercept = r.get<double>("intercept");
  r.finish();
  return s;
}

}  // namespace

PruneSummary summarize_mask(const KeepMaskSequence& mask) {
  PruneSummary s;
  s.frames = mask.frames();
  s.rows = mask.rows();
  s.cols = mask.cols();
  s.tokens = mask.size();
  s.kept_tokens = count_true(mask);
  s.prune_rate = prune_rate(mask);
  s.prune_rate_per_frame = prune_rate_per_frame(mask);
  return s;
}

std::string to_json(const PearsonReport& r) {
  Json j = document("pearson");
  j["r"] = r.r;
  j["n_samples"] = r.n_samples;
  j["mean_x"] = r.mean_x;
  j["mean_y"] = r.mean_y;
  j["var_x"] = r.var_x;
  j["var_y"] = r.var_y;
  return dump(j);
}

std::string to_json(const CompressionSweepReport& r) {
  Json j = document("compression");
  Json list = Json::array();
  for (const auto& c : r.reports) {
    list.push_back(Json{{"theta", c.theta},
                        {"compressed_fraction", c.compressed_fraction},
                        {"replaced", c.replaced},
                        {"candidates", c.candidates},
                        {"fidelity_mse", c.fidelity_mse}});
  }
  j["reports"] = std::move(list);
  return dump(j);
}

std::string to_json(const PruneSummary& r) {
  Json j = document("prune");
  j["frames"] = r.frames;
  j["rows"] = r.rows;
  j["cols"] = r.cols;
  j["tokens"] = r.tokens;
  j["kept_tokens"] = r.kept_tokens;
  j["prune_rate"] = r.prune_rate;
  j["prune_rate_per_frame"] = r.prune_rate_per_frame;
  return dump(j);
}

std::string to_json(const RecoveryErrorReport& r) {
  Json j = document("recovery-error");
  j["max_error"] = r.max_error;
  j["mean_error"] = r.mean_error;
  j["delta"] = r.delta;
  j["tokens"] = r.tokens;
  j["kept_tokens"] = r.kept_tokens;
  j["expanded_keys"] = r.expanded_keys;
  return dump(j);
}

std::string to_json(const MomentPair& r) {
  Json j = document("noise-moments");
  j["independent"] = moment_json(r.independent);
  j["duplicated"] = moment_json(r.duplicated);
  return dump(j);
}

std::string to_json(const AggregationReport& r) {
  Json j = document("aggregation");
  j["independent"] = sweep_json(r.independent);
  j["duplicated"] = sweep_json(r.duplicated);
  return dump(j);
}

std::string to_json(const PipelineStats& r) {
  Json j = document("pipeline");
  j["prune_rate"] = r.prune_rate;
  j["tokens"] = r.tokens;
  j["kept_tokens"] = r.kept_tokens;
  j["prune_ms"] = r.prune_ms;
  j["denoise_ms"] = r.denoise_ms;
  j["restore_ms"] = r.restore_ms;
  j["total_ms"] = r.total_ms;
  j["distance_to_baseline"] =
      r.distance_to_baseline ? Json(*r.distance_to_baseline) : Json(nullptr);
  return dump(j);
}

std::string to_json(const LatencyCurve& r) {
  Json j = document("latency");
  Json list = Json::array();
  for (const auto& s : r.samples) {
    list.push_back(Json{{"kept_fraction", s.kept_fraction},
                        {"kept_tokens", s.kept_tokens},
                        {"mean_ms", s.mean_ms},
                        {"std_ms", s.std_ms},
                        {"median_ms", s.median_ms}});
  }
  j["samples"] = std::move(list);
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["r"] = r.r;
  j["monotone"] = r.monotone;
  return dump(j);
}

std::string latency_csv(const LatencyCurve& curve) {
  std::string out = "kept_fraction,mean_ms,std_ms\n";
  char line[128];
  for (const auto& s : curve.samples) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.kept_fraction, s.mean_ms, s.std_ms);
    out += line;
  }
  return out;
}

template <>
PearsonReport parse_report<PearsonReport>(std::string_view json) {
  const Json j = parse_document(json, "pearson");
  Reader r(j, "pearson report");
  r.get<std::string>("schema");
  PearsonReport p;
  p.r = r.get<double>("r");
  p.n_samples = r.get<std::size_t>("n_samples");
  p.mean_x = r.get<double>("mean_x");
  p.mean_y = r.get<double>("mean_y");
  p.var_x = r.get<double>("var_x");
  p.var_y = r.get<double>("var_y");
  r.finish();
  return p;
}

template <>
CompressionSweepReport parse_report<CompressionSweepReport>(std::string_view json) {
  const Json j = parse_document(json, "compression");
  Reader r(j, "compression report");
  r.get<std::string>("schema");
  const Json& list = r.child("reports");
  r.finish();
  if (!list.is_array()) throw FormatError("compression report: 'reports' must be an array");
  CompressionSweepReport out;
  for (const auto& item : list) {
    Reader c(item, "compression entry");
    CompressionReport e;
    e.theta = c.get<double>("theta");
    e.compressed_fraction = c.get<double>("compressed_fraction");
    e.replaced = c.get<std::size_t>("replaced");
    e.candidates = c.get<std::size_t>("candidates");
    e.fidelity_mse = c.get<double>("fidelity_mse");
    c.finish();
    out.reports.push_back(e);
  }
  return out;
}

template <>
PruneSummary parse_report<PruneSummary>(std::string_view json) {
  const Json j = parse_document(json, "prune");
  Reader r(j, "prune report");
  r.get<std::string>("schema");
  PruneSummary s;
  s.frames = r.get<int>("frames");
  s.rows = r.get<int>("rows");
  s.cols = r.get<int>("cols");
  s.tokens = r.get<std::size_t>("tokens");
  s.kept_tokens = r.get<std::size_t>("kept_tokens");
  s.prune_rate = r.get<double>("prune_rate");
  s.prune_rate_per_frame = r.get<std::vector<double>>("prune_rate_per_frame");
  r.finish();
  return s;
}

template <>
RecoveryErrorReport parse_report<RecoveryErrorReport>(std::string_view json) {
  const Json j = parse_document(json, "recovery-error");
  Reader r(j, "recovery-error report");
  r.get<std::string>("schema");
  RecoveryErrorReport e;
  e.max_error = r.get<double>("max_error");
  e.mean_error = r.get<double>("mean_error");
  e.delta = r.get<double>("delta");
  e.tokens = r.get<std::size_t>("tokens");
  e.kept_tokens = r.get<std::size_t>("kept_tokens");
  e.expanded_keys = r.get<std::size_t>("expanded_keys");
  r.finish();
  return e;
}

template <>
MomentPair parse_report<MomentPair>(std::string_view json) {
  const Json j = parse_document(json, "noise-moments");
  Reader r(j, "noise-moments report");
  r.get<std::string>("schema");
  MomentPair p;
  p.independent = moment_from(r.child("independent"), "independent moments");
  p.duplicated = moment_from(r.child("duplicated"), "duplicated moments");
  r.finish();
  return p;
}

template <>
AggregationReport parse_report<AggregationReport>(std::string_view json) {
  const Json j = parse_document(json, "aggregation");
  Reader r(j, "aggregation report");
  r.get<std::string>("schema");
  AggregationReport a;
  a.independent = sweep_from(r.child("independent"), "independent sweep");
  a.duplicated = sweep_from(r.child("duplicated"), "duplicated sweep");
  r.finish();
  return a;
}

template <>
PipelineStats parse_report<PipelineStats>(std::string_view json) {
  const Json j = parse_document(json, "pipeline");
  Reader r(j, "pipeline report");
  r.get<std::string>("schema");
  PipelineStats s;
  s.prune_rate = r.get<double>("prune_rate");
  s.tokens = r.get<std::size_t>("tokens");
  s.kept_tokens = r.get<std::size_t>("kept_tokens");
  s.prune_ms = r.get<double>("prune_ms");
  s.denoise_ms = r.get<double>("denoise_ms");
  s.restore_ms = r.get<double>("restore_ms");
  s.total_ms = r.get<double>("total_ms");
  const Json& d = r.child("distance_to_baseline");
  if (!d.is_null()) {
    if (!d.is_number()) throw FormatError("pipeline report: distance_to_baseline must be a number");
    s.distance_to_baseline = d.get<double>();
  }
  r.finish();
  return s;
}

template <>
LatencyCurve parse_report<LatencyCurve>(std::string_view json) {
  const Json j = parse_document(json, "latency");
  Reader r(j, "latency report");
  r.get<std::string>("schema");
  LatencyCurve c;
  const Json& list = r.child("samples");
  if (!list.is_array()) throw FormatError("latency report: 'samples' must be an array");
  for (const auto& item : list) {
    Reader s(item, "latency sample");
    LatencySample x;
    x.kept_fraction = s.get<double>("kept_fraction");
    x.kept_tokens = s.get<std::size_t>("kept_tokens");
    x.mean_ms = s.get<double>("mean_ms");
    x.std_ms = s.get<double>("std_ms");
    x.median_ms = s.get<double>("median_ms");
    s.finish();
    c.samples.push_back(x);
  }
  c.slope = r.get<double>("slope");
  c.intercept = r.get<double>("intercept");
  c.r = r.get<double>("r");
  c.monotone = r.get<bool>("monotone");
  r.finish();
  return c;
}

}  // namespace lipar
