#include "lipar/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace lipar {
namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& j, const char* section, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw FormatError(std::string("config: '") + section + "' must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) {
      throw FormatError(std::string("config: unknown key '") + item.key() + "' in '" + section +
                        "'");
    }
  }
}

template <typename T>
void read(const Json& j, const char* section, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("config: '") + section + "." + key + "' has the wrong type");
  }
}

void read_path(const Json& j, const char* key, std::optional<std::filesystem::path>& out) {
  std::string s;
  if (!j.contains(key)) return;
  read(j, "io", key, s);
  out = s;
}

void read_prune(const Json& j, PruneConfig& p) {
  require_keys(j, "prune", {"tau1", "tau2", "block_size", "patch", "smoothing"});
  read(j, "prune", "tau1", p.tau1);
  read(j, "prune", "tau2", p.tau2);
  read(j, "prune", "block_size", p.block_size);
  if (j.contains("patch")) {
    std::vector<int> v;
    read(j, "prune", "patch", v);
    if (v.size() != 3) throw FormatError("config: 'prune.patch' must be [t, h, w]");
    p.patch = PatchDims{v[0], v[1], v[2]};
  }
  if (j.contains("smoothing")) {
    const Json& s = j["smoothing"];
    auto& c = p.smoothing;
    require_keys(s, "prune.smoothing",
                 {"gaussian_extent", "gaussian_sigma", "median_extent", "closing_extent",
                  "dilation_extent", "dilation_iterations"});
    read(s, "prune.smoothing", "gaussian_extent", c.gaussian_extent);
    read(s, "prune.smoothing", "gaussian_sigma", c.gaussian_sigma);
    read(s, "prune.smoothing", "median_extent", c.median_extent);
    read(s, "prune.smoothing", "closing_extent", c.closing_extent);
    read(s, "prune.smoothing", "dilation_extent", c.dilation_extent);
    read(s, "prune.smoothing", "dilation_iterations", c.dilation_iterations);
  }
}

void read_recovery(const Json& j, std::optional<RecoveryConfig>& rec) {
  require_keys(j, "recovery", {"enabled", "degree", "noise_aware"});
  bool enabled = rec.has_value();
  read(j, "recovery", "enabled", enabled);
  RecoveryConfig r = rec.value_or(RecoveryConfig{});
  if (j.contains("degree")) {
    const Json& d = j["degree"];
    if (d.is_string() && d.get<std::string>() == "all") {
      r.degree.reset();
    } else if (d.is_number_integer()) {
      r.degree = d.get<int>();
    } else {
      throw FormatError("config: 'recovery.degree' must be an integer or \"all\"");
    }
  }
  read(j, "recovery", "noise_aware", r.noise_aware);
  rec = enabled ? std::optional<RecoveryConfig>(r) : std::nullopt;
}

void read_denoiser(const Json& j, ToyDenoiserConfig& d) {
  require_keys(j, "denoiser",
               {"n_blocks", "model_dim", "n_heads", "head_dim", "mlp_hidden", "n_steps",
                "initial_noise", "cache_window", "qk_alignment", "residual_scale", "seed"});
  read(j, "denoiser", "n_blocks", d.n_blocks);
  read(j, "denoiser", "model_dim", d.model_dim);
  read(j, "denoiser", "n_heads", d.heads.n_heads);
  read(j, "denoiser", "head_dim", d.heads.head_dim);
  read(j, "denoiser", "mlp_hidden", d.mlp_hidden);
  read(j, "denoiser", "n_steps", d.n_steps);
  read(j, "denoiser", "initial_noise", d.initial_noise);
  read(j, "denoiser", "cache_window", d.cache_window);
  read(j, "denoiser", "qk_alignment", d.qk_alignment);
  read(j, "denoiser", "residual_scale", d.residual_scale);
  read(j, "denoiser", "seed", d.seed);
}

void read_rope(const Json& j, RoPEConfig& r) {
  require_keys(j, "rope", {"base", "rotated_dims", "mode"});
  read(j, "rope", "base", r.base);
  read(j, "rope", "rotated_dims", r.rotated_dims);
  if (j.contains("mode")) {
    std::string m;
    read(j, "rope", "mode", m);
    if (m == "temporal") {
      r.mode = RopeMode::temporal;
    } else if (m == "factorized") {
      r.mode = RopeMode::factorized;
    } else {
      throw FormatError("config: 'rope.mode' must be \"temporal\" or \"factorized\"");
    }
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  require_keys(j, "<root>", {"prune", "recovery", "denoiser", "rope", "noise_seed", "io"});
  RunConfig cfg;
  auto& p = cfg.pipeline;
  if (j.contains("prune")) read_prune(j["prune"], p.prune);
  if (j.contains("recovery")) read_recovery(j["recovery"], p.recovery);
  if (j.contains("denoiser")) read_denoiser(j["denoiser"], p.denoiser);
  if (j.contains("rope")) read_rope(j["rope"], p.denoiser.rope);
  read(j, "<root>", "noise_seed", p.noise_seed);
  if (j.contains("io")) {
    const Json& io = j["io"];
    require_keys(io, "io", {"input", "output", "stats"});
    read_path(io, "input", cfg.input);
    read_path(io, "output", cfg.output);
    read_path(io, "stats", cfg.stats);
  }
  p.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_json(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  const auto& s = p.prune.smoothing;
  const auto& d = p.denoiser;
  Json j;
  j["prune"] = Json{{"tau1", p.prune.tau1},
                    {"tau2", p.prune.tau2},
                    {"block_size", p.prune.block_size},
                    {"patch", {p.prune.patch.t, p.prune.patch.h, p.prune.patch.w}},
                    {"smoothing",
                     Json{{"gaussian_extent", s.gaussian_extent},
                          {"gaussian_sigma", s.gaussian_sigma},
                          {"median_extent", s.median_extent},
                          {"closing_extent", s.closing_extent},
                          {"dilation_extent", s.dilation_extent},
                          {"dilation_iterations", s.dilation_iterations}}}};
  const RecoveryConfig rec = p.recovery.value_or(RecoveryConfig{});
  j["recovery"] = Json{{"enabled", p.recovery.has_value()},
                       {"degree", rec.degree ? Json(*rec.degree) : Json("all")},
                       {"noise_aware", rec.noise_aware}};
  j["denoiser"] = Json{{"n_blocks", d.n_blocks},
                       {"model_dim", d.model_dim},
                       {"n_heads", d.heads.n_heads},
                       {"head_dim", d.heads.head_dim},
                       {"mlp_hidden", d.mlp_hidden},
                       {"n_steps", d.n_steps},
                       {"initial_noise", d.initial_noise},
                       {"cache_window", d.cache_window},
                       {"qk_alignment", d.qk_alignment},
                       {"residual_scale", d.residual_scale},
                       {"seed", d.seed}};
  j["rope"] = Json{{"base", d.rope.base},
                   {"rotated_dims", d.rope.rotated_dims},
                   {"mode", d.rope.mode == RopeMode::temporal ? "temporal" : "factorized"}};
  j["noise_seed"] = p.noise_seed;
  Json io = Json::object();
  if (cfg.input) io["input"] = cfg.input->string();
  if (cfg.output) io["output"] = cfg.output->string();
  if (cfg.stats) io["stats"] = cfg.stats->string();
  j["io"] = std::move(io);
  return j.dump(2) + "\n";
}

}  // namespace lipar
