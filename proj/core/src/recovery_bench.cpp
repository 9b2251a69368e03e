#include "lipar/recovery_bench.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "lipar/pipeline.hpp"
#include "lipar/random.hpp"

namespace lipar {
namespace {

Matrix gaussian(int rows, int cols, double stddev, Rng& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = static_cast<float>(nd(rng));
  return m;
}

double row_rel_l2(std::span<const float> a, std::span<const float> ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - ref[i];
    num += d * d;
    den += static_cast<double>(ref[i]) * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <typename T>
T parse_number(std::string_view s, std::string_view spec) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("prune pattern '" + std::string(spec) + "': bad number");
  }
  return v;
}

}  // namespace

PrunePattern parse_prune_pattern(std::string_view spec) {
  PrunePattern p;
  if (spec == "none") {
    p.kind = PrunePattern::Kind::none;
  } else if (spec == "first") {
    p.kind = PrunePattern::Kind::first;
  } else if (spec.starts_with("every:")) {
    p.kind = PrunePattern::Kind::every;
    p.every = parse_number<int>(spec.substr(6), spec);
    if (p.every < 1) throw ValidationError("prune pattern: every:K needs K >= 1");
  } else if (spec.starts_with("random:")) {
    p.kind = PrunePattern::Kind::random;
    // from_chars for double is not in libstdc++ 11; stod is.
    std::size_t used = 0;
    const std::string num(spec.substr(7));
    try {
      p.probability = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != num.size() || num.empty() || !(p.probability >= 0.0 && p.probability <= 1.0)) {
      throw ValidationError("prune pattern: random:P needs P in [0, 1]");
    }
  } else {
    throw ValidationError("unknown prune pattern '" + std::string(spec) +
                          "' (none, first, every:K, random:P)");
  }
  return p;
}

std::string to_string(const PrunePattern& p) {
  switch (p.kind) {
    case PrunePattern::Kind::none: return "none";
    case PrunePattern::Kind::first: return "first";
    case PrunePattern::Kind::every: return "every:" + std::to_string(p.every);
    case PrunePattern::Kind::random: return "random:" + std::to_string(p.probability);
  }
  return "?";
}

KeepMaskSequence pattern_mask(const PrunePattern& p, int frames, int rows, int cols,
                              std::uint64_t seed) {
  KeepMaskSequence m(frames, rows, cols, std::uint8_t{0});
  Rng rng(derive_seed(seed, {0x9A77}));
  std::bernoulli_distribution keep(p.kind == PrunePattern::Kind::random ? p.probability : 0.0);
  for (int t = 0; t < frames; ++t)
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x) {
        bool k = t == 0;
        switch (p.kind) {
          case PrunePattern::Kind::none: k = true; break;
          case PrunePattern::Kind::first: break;
          case PrunePattern::Kind::every: k = k || t % p.every == 0; break;
          case PrunePattern::Kind::random: k = k || keep(rng); break;
        }
        m.at(t, y, x) = k ? 1 : 0;
      }
  return m;
}

void RecoveryBenchConfig::validate() const {
  if (frames < 1 || rows < 1 || cols < 1) throw ValidationError("recover-bench: bad grid extents");
  if (model_dim < 1) throw ValidationError("recover-bench: model_dim must be >= 1");
  heads.validate();
  recovery.validate();
  if (!(perturbation >= 0.0) || !(noise >= 0.0)) {
    throw ValidationError("recover-bench: perturbation and noise must be >= 0");
  }
}

RecoveryFixture recovery_fixture(const RecoveryBenchConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, {0xF1C}));
  const int dm = cfg.model_dim, width = cfg.heads.width();
  const Matrix base = gaussian(cfg.rows * cfg.cols, dm, 1.0, rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(dm));
  RecoveryFixture f;
  f.weights.wq = gaussian(dm, width, s, rng);
  f.weights.wk = gaussian(dm, width, s, rng);
  f.weights.wv = gaussian(dm, width, s, rng);

  std::normal_distribution<double> nd;
  const int n = cfg.tokens();
  f.clean.embeddings = Matrix(n, dm);
  f.noisy.embeddings = Matrix(n, dm);
  int i = 0;
  for (int t = 0; t < cfg.frames; ++t)
    for (int y = 0; y < cfg.rows; ++y)
      for (int x = 0; x < cfg.cols; ++x, ++i) {
        const Position p{t, y, x};
        f.clean.positions.push_back(p);
        f.noisy.positions.push_back(p);
        Rng pr(derive_seed(cfg.seed, {0x7E, t, y, x}));
        const auto b = base.row(y * cfg.cols + x);
        auto c = f.clean.embeddings.row(i);
        auto z = f.noisy.embeddings.row(i);
        for (int d = 0; d < dm; ++d) {
          const double g = nd(pr);
          const double e = nd(pr);
          c[d] = static_cast<float>(b[d] + cfg.perturbation * g);
          z[d] = static_cast<float>(c[d] + cfg.noise * e);
        }
      }
  return f;
}

RecoveryErrorReport recovery_error(const RecoveryBenchConfig& cfg) {
  const RecoveryFixture f = recovery_fixture(cfg);
  const KeepMaskSequence mask = pattern_mask(cfg.pattern, cfg.frames, cfg.rows, cfg.cols, cfg.seed);
  const RunLengthPlan plan = build_plan(mask);

  const Matrix oracle = full_attention(f.noisy, f.weights, cfg.heads, cfg.rope);
  const TokenSequence kept = select_kept(f.noisy, mask);
  const TokenSequence kept_clean = select_kept(f.clean, mask);
  const KVCache cache = cache_from_tokens(kept_clean, f.weights, cfg.rows, cfg.cols, cfg.frames);
  const RecoveredAttention rec = recovered_attention_detailed(
      kept, plan, cfg.recovery.noise_aware ? &cache : nullptr, cfg.recovery, f.weights, cfg.heads,
      cfg.rope);

  RecoveryErrorReport rep;
  rep.tokens = static_cast<std::size_t>(cfg.tokens());
  rep.kept_tokens = kept.size();
  rep.expanded_keys = static_cast<std::size_t>(rec.keys.keys.rows());

  const auto index_of = [&](const Position& p) {
    return (p.t * cfg.rows + p.y) * cfg.cols + p.x;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double e = row_rel_l2(rec.output.row(static_cast<int>(i)),
                                oracle.row(index_of(kept.positions[i])));
    rep.max_error = std::max(rep.max_error, e);
    sum += e;
  }
  rep.mean_error = kept.size() ? sum / static_cast<double>(kept.size()) : 0.0;

  // True keys of the unpruned sequence, rotated to their own positions.
  Matrix true_keys = multiply(f.noisy.embeddings, f.weights.wk);
  for (int i = 0; i < true_keys.rows(); ++i) {
    rope_rotate_heads(true_keys.row(i), cfg.heads.n_heads, cfg.heads.head_dim,
                      f.noisy.positions[static_cast<std::size_t>(i)], cfg.rope);
  }
  for (std::size_t e = 0; e < rec.keys.positions.size(); ++e) {
    const auto origin = rec.keys.origins[e];
    if (origin != KeyOrigin::duplicate_self && origin != KeyOrigin::duplicate_clean) continue;
    const auto dup = rec.keys.keys.row(static_cast<int>(e));
    const auto ref = true_keys.row(index_of(rec.keys.positions[e]));
    double ss = 0.0;
    for (std::size_t d = 0; d < dup.size(); ++d) {
      const double diff = static_cast<double>(dup[d]) - ref[d];
      ss += diff * diff;
    }
    rep.delta = std::max(rep.delta, std::sqrt(ss));
  }
  return rep;
}

}  // namespace lipar
