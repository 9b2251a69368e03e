#pragma once

// JSON run configuration for the pipeline subcommand. Every section and key
// is optional; absent keys keep their defaults and unknown keys are
// rejected.
//
// {
//   "prune":     {"tau1", "tau2", "block_size", "patch": [t, h, w],
//                 "smoothing": {"gaussian_extent", "gaussian_sigma", "median_extent",
//                               "closing_extent", "dilation_extent", "dilation_iterations"}},
//   "recovery":  {"enabled", "degree": <int> | "all", "noise_aware"},
//   "denoiser":  {"n_blocks", "model_dim", "n_heads", "head_dim", "mlp_hidden", "n_steps",
//                 "initial_noise", "cache_window", "qk_alignment", "residual_scale",
//                 "seed"},
//   "rope":      {"base", "rotated_dims", "mode": "temporal" | "factorized"},
//   "noise_seed": <int>,
//   "io":        {"input", "output", "stats"}
// }

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lipar/pipeline.hpp"

namespace lipar {

struct RunConfig {
  PipelineConfig pipeline{};
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> stats;
};

/// Throws FormatError on malformed JSON, unknown keys, or wrong types, and
/// ValidationError when the resulting config is out of range.
RunConfig parse_run_config(std::string_view json);
RunConfig load_run_config(const std::filesystem::path& path);
/// Full document with every key spelled out.
std::string run_config_json(const RunConfig& cfg);

}  // namespace lipar
