// lipar: command-line front end. Reports go to stdout unless --report is
// given; tensors are LTNS files.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical assertion failed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lipar/fixtures.hpp"
#include "lipar/latency.hpp"
#include "lipar/lif_pruning.hpp"
#include "lipar/ltns.hpp"
#include "lipar/noise_stats.hpp"
#include "lipar/parallel.hpp"
#include "lipar/random.hpp"
#include "lipar/pipeline.hpp"
#include "lipar/recovery_bench.hpp"
#include "lipar/redundancy.hpp"
#include "lipar/report.hpp"
#include "lipar/restoration.hpp"
#include "lipar/run_config.hpp"

namespace fs = std::filesystem;
using namespace lipar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitAssert = 3;

PatchDims patch_from(const std::vector<int>& v, const char* what) {
  if (v.size() != 3) throw ValidationError(std::string(what) + " needs t,h,w");
  return PatchDims{v[0], v[1], v[2]};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os || !(os << text)) throw ValidationError("cannot write " + path);
}

// "a:b:n" -> n evenly spaced values from a to b inclusive.
std::vector<double> parse_range(const std::string& s) {
  double a = 0, b = 0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &a, &b, &n, &tail) != 3 || n < 2) {
    throw ValidationError("range '" + s + "' must be start:stop:count with count >= 2");
  }
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

std::optional<int> parse_degree(const std::string& s) {
  if (s == "all" || s == "ALL") return std::nullopt;
  try {
    std::size_t used = 0;
    const int m = std::stoi(s, &used);
    if (used == s.size() && m >= 1) return m;
  } catch (const std::exception&) {
  }
  throw ValidationError("--m must be a positive integer or 'all'");
}

struct Common {
  std::string report;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipar: latent inter-frame pruning and attention recovery toolkit"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);

  // analyze-corr
  auto* corr = app.add_subcommand("analyze-corr", "Pearson r of pixel vs latent temporal deltas");
  std::string corr_pixel, corr_latent, corr_report;
  std::vector<int> corr_patch{1, 1, 1}, corr_pixel_patch{1, 1, 1};
  corr->add_option("--pixel", corr_pixel, "Pixel grid (LTNS)")->required();
  corr->add_option("--latent", corr_latent, "Latent grid (LTNS)")->required();
  corr->add_option("--patch", corr_patch, "Latent patch t,h,w")->delimiter(',')->expected(3);
  corr->add_option("--pixel-patch", corr_pixel_patch, "Pixel patch t,h,w")
      ->delimiter(',')
      ->expected(3);
  corr->add_option("--report", corr_report, "Write the JSON report here");

  // compress
  auto* comp = app.add_subcommand("compress", "Threshold compression sweep");
  std::string comp_input, comp_out, comp_report;
  std::vector<double> comp_thetas;
  std::vector<int> comp_patch{2, 2, 2};
  comp->add_option("--input", comp_input, "Latent grid (LTNS)")->required();
  comp->add_option("--thetas", comp_thetas, "Ascending thresholds")->delimiter(',')->required();
  comp->add_option("--patch", comp_patch, "Patch t,h,w")->delimiter(',')->expected(3);
  comp->add_option("--out", comp_out, "Grid compressed with the last theta (LTNS)");
  comp->add_option("--report", comp_report, "Write the JSON report here");

  // prune
  auto* prune = app.add_subcommand("prune", "Compute the LIF keep mask");
  std::string prune_input, prune_out, prune_stages, prune_kept, prune_report;
  PruneConfig prune_cfg;
  std::vector<int> prune_patch{2, 2, 2};
  prune->add_option("--input", prune_input, "Latent grid (LTNS)")->required();
  prune->add_option("--tau1", prune_cfg.tau1, "Short-term threshold")->capture_default_str();
  prune->add_option("--tau2", prune_cfg.tau2, "Long-term threshold")->capture_default_str();
  prune->add_option("--block-size", prune_cfg.block_size, "Denoising block size S")
      ->capture_default_str();
  prune->add_option("--patch", prune_patch, "Patch t,h,w")->delimiter(',')->expected(3);
  prune->add_option("--out", prune_out, "Keep mask (LTNS, u8)");
  prune->add_option("--emit-stages", prune_stages, "Directory for intermediate masks");
  prune->add_option("--kept-out", prune_kept, "Kept patches (LTNS)");
  prune->add_option("--report", prune_report, "Write the JSON stats here");

  // restore
  auto* rest = app.add_subcommand("restore", "Forward-fill pruned patches");
  std::string rest_kept, rest_mask, rest_out;
  rest->add_option("--kept", rest_kept, "Kept patches (LTNS)")->required();
  rest->add_option("--mask", rest_mask, "Keep mask (LTNS)")->required();
  rest->add_option("--out", rest_out, "Restored grid (LTNS)")->required();

  // recover-bench
  auto* rb = app.add_subcommand("recover-bench", "Recovered vs exact attention error");
  RecoveryBenchConfig rb_cfg;
  int rb_tokens = rb_cfg.tokens(), rb_heads = rb_cfg.heads.n_heads;
  std::string rb_pattern = "every:4", rb_m = "all", rb_report;
  bool rb_noise_aware = true;
  std::optional<double> rb_assert;
  rb->add_option("--tokens", rb_tokens, "Unpruned tokens N (multiple of rows*cols)")
      ->capture_default_str();
  rb->add_option("--rows", rb_cfg.rows, "Patch rows")->capture_default_str();
  rb->add_option("--cols", rb_cfg.cols, "Patch cols")->capture_default_str();
  rb->add_option("--dim", rb_cfg.model_dim, "Model and attention width D")->capture_default_str();
  rb->add_option("--heads", rb_heads, "Attention heads (must divide D)")->capture_default_str();
  rb->add_option("--prune-pattern", rb_pattern, "none | first | every:K | random:P")
      ->capture_default_str();
  rb->add_option("--m", rb_m, "Recovery degree: integer or 'all'")->capture_default_str();
  rb->add_option("--noise-aware", rb_noise_aware, "Duplicate from the clean cache")
      ->capture_default_str();
  rb->add_option("--perturbation", rb_cfg.perturbation, "Temporal perturbation scale")
      ->capture_default_str();
  rb->add_option("--noise", rb_cfg.noise, "Per-token noise sigma")->capture_default_str();
  rb->add_option("--seed", rb_cfg.seed, "Seed")->capture_default_str();
  rb->add_option("--assert-max-error", rb_assert, "Exit 3 if max error exceeds this");
  rb->add_option("--report", rb_report, "Write the JSON report here");

  // noise-stats
  auto* ns = app.add_subcommand("noise-stats", "Moments of duplicated vs independent noise");
  NoiseModel ns_model;
  std::string ns_w = "identity", ns_report;
  std::vector<int> ns_aggregate;
  ns->add_option("--dim", ns_model.dim, "Noise dimension D")->capture_default_str();
  ns->add_option("--samples", ns_model.n_samples, "Monte-Carlo samples")->capture_default_str();
  ns->add_option("--w", ns_w, "identity | random | <LTNS matrix>")->capture_default_str();
  ns->add_option("--seed", ns_model.seed, "Seed")->capture_default_str();
  ns->add_option("--aggregate", ns_aggregate,
                 "Report the aggregation-variance sweep over these n instead")
      ->delimiter(',');
  ns->add_option("--report", ns_report, "Write the JSON report here");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Prune, denoise, recover, restore");
  std::string pipe_input, pipe_config, pipe_out, pipe_stats, pipe_mask;
  bool pipe_no_baseline = false, pipe_print_config = false;
  pipe->add_option("--input", pipe_input, "Latent grid (LTNS); overrides io.input");
  pipe->add_option("--config", pipe_config, "Run configuration (JSON)");
  pipe->add_option("--out", pipe_out, "Output grid (LTNS); overrides io.output");
  pipe->add_option("--stats", pipe_stats, "Stats JSON; overrides io.stats");
  pipe->add_option("--mask-out", pipe_mask, "Keep mask (LTNS)");
  pipe->add_flag("--no-baseline", pipe_no_baseline, "Skip the unpruned reference run");
  pipe->add_flag("--print-config", pipe_print_config, "Print the effective config and exit");

  // latency-sweep
  auto* lat = app.add_subcommand("latency-sweep", "Denoiser latency vs kept fraction");
  LatencySweepConfig lat_cfg;
  int lat_tokens = lat_cfg.frames * lat_cfg.rows * lat_cfg.cols;
  int lat_heads = lat_cfg.denoiser.heads.n_heads;
  std::string lat_fractions = "0.2:1.0:5", lat_csv, lat_report;
  lat->add_option("--blocks", lat_cfg.denoiser.n_blocks, "Denoiser blocks")->capture_default_str();
  lat->add_option("--tokens", lat_tokens, "Tokens N (multiple of rows*cols)")->capture_default_str();
  lat->add_option("--rows", lat_cfg.rows, "Patch rows")->capture_default_str();
  lat->add_option("--cols", lat_cfg.cols, "Patch cols")->capture_default_str();
  lat->add_option("--dim", lat_cfg.denoiser.model_dim, "Model width D")->capture_default_str();
  lat->add_option("--heads", lat_heads, "Attention heads (must divide D)")->capture_default_str();
  lat->add_option("--fractions", lat_fractions, "start:stop:count")->capture_default_str();
  lat->add_option("--runs", lat_cfg.runs, "Timed runs per fraction")->capture_default_str();
  lat->add_option("--warmup", lat_cfg.warmup, "Untimed runs before the first fraction")->capture_default_str();
  lat->add_option("--seed", lat_cfg.seed, "Seed")->capture_default_str();
  lat->add_option("--csv", lat_csv, "Write the CSV here (default: stdout)");
  lat->add_option("--report", lat_report, "Write the JSON curve here");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic fixture");
  FixtureSpec syn_spec;
  std::string syn_kind = "static", syn_out, syn_pixel_out;
  std::vector<int> syn_dims{8, 16, 16, 2}, syn_patch{2, 2, 2};
  syn->add_option("--kind", syn_kind,
                  "static | moving-square | staircase | redundant-noisy | linear-gaussian-pair")
      ->capture_default_str();
  syn->add_option("--dims", syn_dims, "frames,rows,cols,channels")->delimiter(',')->expected(4);
  syn->add_option("--patch", syn_patch, "Patch t,h,w")->delimiter(',')->expected(3);
  syn->add_option("--amplitude", syn_spec.amplitude, "Square value")->capture_default_str();
  syn->add_option("--noise", syn_spec.noise_sigma, "Noise sigma")->capture_default_str();
  syn->add_option("--slope", syn_spec.slope, "Latent/pixel slope")->capture_default_str();
  syn->add_option("--seed", syn_spec.seed, "Seed")->capture_default_str();
  syn->add_option("--out", syn_out, "Grid (latent for the pair kind)")->required();
  syn->add_option("--pixel-out", syn_pixel_out, "Pixel grid for the pair kind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    set_worker_threads(threads);

    if (*corr) {
      const auto pix = patchify(ltns::to_grid(ltns::read_file(corr_pixel)),
                                patch_from(corr_pixel_patch, "--pixel-patch"));
      const auto lat = patchify(ltns::to_grid(ltns::read_file(corr_latent)),
                                patch_from(corr_patch, "--patch"));
      const auto r = pixel_latent_correlation(temporal_delta_l1(pix), temporal_delta_l1(lat));
      emit(to_json(r), corr_report);
    } else if (*comp) {
      const auto grid = patchify(ltns::to_grid(ltns::read_file(comp_input)),
                                 patch_from(comp_patch, "--patch"));
      CompressionSweepReport rep{compression_sweep(grid, comp_thetas)};
      if (!comp_out.empty()) {
        const auto res = compress_latents(grid, comp_thetas.back());
        ltns::write_file(comp_out, ltns::from_grid(unpatchify(res.patches)));
      }
      emit(to_json(rep), comp_report);
    } else if (*prune) {
      prune_cfg.patch = patch_from(prune_patch, "--patch");
      prune_cfg.validate();
      const auto grid = patchify(ltns::to_grid(ltns::read_file(prune_input)), prune_cfg.patch);
      const auto stages = lif_prune_stages(grid, prune_cfg);
      if (!prune_out.empty()) ltns::write_file(prune_out, ltns::from_mask(stages.keep));
      if (!prune_kept.empty()) {
        ltns::write_file(prune_kept, ltns::from_kept(extract_kept(grid, stages.keep)));
      }
      if (!prune_stages.empty()) {
        const fs::path dir(prune_stages);
        fs::create_directories(dir);
        const auto put = [&](const char* name, const BoolField& m) {
          if (m.size()) ltns::write_file(dir / name, ltns::from_mask(m));
        };
        put("short_term.ltns", stages.short_term.mask);
        put("long_term.ltns", stages.long_term.mask);
        put("combined.ltns", stages.combined);
        put("median.ltns", stages.after_median);
        put("closing.ltns", stages.after_closing);
        put("keep.ltns", stages.keep);
      }
      emit(to_json(summarize_mask(stages.keep)), prune_report);
    } else if (*rest) {
      PatchDims patch;
      int channels = 0;
      auto values = ltns::kept_values(ltns::read_file(rest_kept), patch, channels);
      const auto mask = ltns::to_mask(ltns::read_file(rest_mask));
      const auto set = make_pruned_set(mask, patch, channels, std::move(values));
      ltns::write_file(rest_out, ltns::from_grid(unpatchify(restore(set))));
    } else if (*rb) {
      const int per_frame = rb_cfg.rows * rb_cfg.cols;
      if (per_frame < 1 || rb_tokens < 1 || rb_tokens % per_frame != 0) {
        throw ValidationError("--tokens must be a positive multiple of rows*cols");
      }
      if (rb_heads < 1 || rb_cfg.model_dim % rb_heads != 0) {
        throw ValidationError("--heads must divide --dim");
      }
      rb_cfg.frames = rb_tokens / per_frame;
      rb_cfg.heads = HeadConfig{rb_heads, rb_cfg.model_dim / rb_heads};
      rb_cfg.pattern = parse_prune_pattern(rb_pattern);
      rb_cfg.recovery = RecoveryConfig{parse_degree(rb_m), rb_noise_aware};
      const auto rep = recovery_error(rb_cfg);
      emit(to_json(rep), rb_report);
      if (rb_assert && !(rep.max_error <= *rb_assert)) {
        std::cerr << "recover-bench: max error " << rep.max_error << " exceeds " << *rb_assert
                  << "\n";
        return kExitAssert;
      }
    } else if (*ns) {
      if (ns_w == "random") {
        ns_model.w = random_w(ns_model.dim, derive_seed(ns_model.seed, {0x57}));
      } else if (ns_w != "identity") {
        ns_model.w = ltns::to_matrix(ltns::read_file(ns_w));
      }
      if (ns_aggregate.empty()) {
        MomentPair rep{quadratic_form_moments(ns_model, false),
                       quadratic_form_moments(ns_model, true)};
        emit(to_json(rep), ns_report);
      } else {
        AggregationReport rep{aggregation_sweep(ns_model, ns_aggregate, false),
                              aggregation_sweep(ns_model, ns_aggregate, true)};
        emit(to_json(rep), ns_report);
      }
    } else if (*pipe) {
      RunConfig cfg = pipe_config.empty() ? RunConfig{} : load_run_config(pipe_config);
      if (!pipe_input.empty()) cfg.input = pipe_input;
      if (!pipe_out.empty()) cfg.output = pipe_out;
      if (!pipe_stats.empty()) cfg.stats = pipe_stats;
      if (pipe_print_config) {
        std::cout << run_config_json(cfg);
        return kExitOk;
      }
      if (!cfg.input) throw ValidationError("pipeline: no input (--input or io.input)");
      const auto latents = ltns::to_grid(ltns::read_file(*cfg.input));
      const auto res = run_pipeline(latents, cfg.pipeline, !pipe_no_baseline);
      if (cfg.output) ltns::write_file(*cfg.output, ltns::from_grid(res.output));
      if (!pipe_mask.empty()) ltns::write_file(pipe_mask, ltns::from_mask(res.mask));
      emit(to_json(res.stats), cfg.stats ? cfg.stats->string() : std::string());
    } else if (*lat) {
      const int per_frame = lat_cfg.rows * lat_cfg.cols;
      if (per_frame < 1 || lat_tokens < 1 || lat_tokens % per_frame != 0) {
        throw ValidationError("--tokens must be a positive multiple of rows*cols");
      }
      auto& d = lat_cfg.denoiser;
      if (lat_heads < 1 || d.model_dim % lat_heads != 0) {
        throw ValidationError("--heads must divide --dim");
      }
      lat_cfg.frames = lat_tokens / per_frame;
      d.heads = HeadConfig{lat_heads, d.model_dim / lat_heads};
      d.mlp_hidden = 2 * d.model_dim;
      lat_cfg.fractions = parse_range(lat_fractions);
      const auto curve = latency_sweep(lat_cfg);
      emit(latency_csv(curve), lat_csv);
      if (!lat_report.empty()) emit(to_json(curve), lat_report);
    } else if (*syn) {
      syn_spec.kind = parse_fixture_kind(syn_kind);
      if (syn_dims.size() != 4) throw ValidationError("--dims needs frames,rows,cols,channels");
      syn_spec.dims = GridDims{syn_dims[0], syn_dims[1], syn_dims[2], syn_dims[3]};
      syn_spec.patch = patch_from(syn_patch, "--patch");
      if (syn_spec.kind == FixtureKind::linear_gaussian_pair) {
        if (syn_pixel_out.empty()) throw ValidationError("--pixel-out is required for this kind");
        const auto pair = synth_pair(syn_spec);
        ltns::write_file(syn_out, ltns::from_grid(pair.latent));
        ltns::write_file(syn_pixel_out, ltns::from_grid(pair.pixel));
      } else {
        ltns::write_file(syn_out, ltns::from_grid(synth_fixture(syn_spec)));
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const CacheMissError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical check failed: " << e.what() << "\n";
    return kExitAssert;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
