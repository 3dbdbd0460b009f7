#include "isgns/sgns_core.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "isgns/errors.hpp"
#include "isgns/random.hpp"
#include "parallel.hpp"

namespace isgns {

// ---------------------------------------------------------------------------
// EmbeddingModel

EmbeddingModel::EmbeddingModel(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::optional<std::size_t> EmbeddingModel::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingModel::row(std::string_view label) const {
  if (auto r = find(label)) return *r;
  throw UnknownVertexError(std::string(label));
}

std::size_t EmbeddingModel::add_row(std::string_view label, std::span<const double> target,
                                    std::span<const double> context) {
  if (target.size() != dim_ || context.size() != dim_) throw std::invalid_argument("row has the wrong dimension");
  auto [it, fresh] = index_.emplace(std::string(label), labels_.size());
  if (!fresh) throw std::invalid_argument("duplicate vertex '" + std::string(label) + "'");
  labels_.emplace_back(label);
  target_.insert(target_.end(), target.begin(), target.end());
  context_.insert(context_.end(), context.begin(), context.end());
  return it->second;
}

std::size_t EmbeddingModel::memory_bytes() const noexcept {
  std::size_t bytes = (target_.capacity() + context_.capacity()) * sizeof(double);
  bytes += labels_.capacity() * sizeof(std::string);
  for (const auto& l : labels_) bytes += l.capacity();
  return bytes;
}

bool EmbeddingModel::all_finite() const noexcept {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(target_.begin(), target_.end(), finite) &&
         std::all_of(context_.begin(), context_.end(), finite);
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
  auto bits_equal = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
             return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
           });
  };
  return dim_ == other.dim_ && labels_ == other.labels_ && bits_equal(target_, other.target_) &&
         bits_equal(context_, other.context_);
}

void TrainConfig::validate() const {
  if (k < 1) throw std::invalid_argument("need at least one negative sample");
  if (!(alpha_min > 0.0 && alpha0 > alpha_min && std::isfinite(alpha0))) {
    throw std::invalid_argument("learning rates must satisfy alpha0 > alpha_min > 0");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

void random_target(std::string_view label, std::size_t dim, std::uint64_t seed, std::vector<double>& out) {
  SplitMix64 rng(hash_combine(seed, label_hash(label)));
  out.resize(dim);
  for (auto& x : out) x = (rng.uniform() - 0.5) / static_cast<double>(dim);
}

}  // namespace

EmbeddingModel init_model(std::span<const std::string> vertices, std::size_t dim, std::uint64_t seed) {
  if (vertices.empty()) throw std::invalid_argument("cannot initialize a model without vertices");
  EmbeddingModel m(dim);
  std::vector<double> t;
  const std::vector<double> zero(dim, 0.0);
  for (const auto& v : vertices) {
    random_target(v, dim, seed, t);
    m.add_row(v, t, zero);
  }
  return m;
}

EmbeddingModel inherit_model(const EmbeddingModel& old, std::span<const std::string> new_vertices,
                             std::uint64_t seed) {
  EmbeddingModel m = old;
  std::vector<double> t;
  const std::vector<double> zero(m.dim(), 0.0);
  for (const auto& v : new_vertices) {
    if (m.contains(v)) continue;
    random_target(v, m.dim(), seed, t);
    m.add_row(v, t, zero);
  }
  return m;
}

EmbeddingModel release_vanished(const EmbeddingModel& m, std::span<const std::string> removed_vertices) {
  std::vector<char> drop(m.size(), 0);
  for (const auto& v : removed_vertices) {
    if (auto r = m.find(v)) drop[*r] = 1;
  }
  EmbeddingModel out(m.dim());
  const std::size_t keep = m.size() - static_cast<std::size_t>(std::count(drop.begin(), drop.end(), 1));
  out.labels_.reserve(keep);
  out.index_.reserve(keep);
  out.target_.reserve(keep * m.dim());
  out.context_.reserve(keep * m.dim());
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (!drop[r]) out.add_row(m.label(r), m.target(r), m.context(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair objective and gradient

double log_sigmoid(double x) noexcept {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) noexcept {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

void check_rows(const EmbeddingModel& m, std::size_t w, std::size_t ctx, std::span<const std::size_t> negatives) {
  auto bad = [&](std::size_t r) { return r >= m.size(); };
  if (bad(w) || bad(ctx) || std::any_of(negatives.begin(), negatives.end(), bad)) {
    throw std::out_of_range("row index outside the model");
  }
}

}  // namespace

double pair_objective(const EmbeddingModel& m, std::size_t w, std::size_t ctx,
                      std::span<const std::size_t> negatives) {
  check_rows(m, w, ctx, negatives);
  const auto t = m.target(w);
  double obj = log_sigmoid(dot(t, m.context(ctx)));
  for (auto n : negatives) obj += log_sigmoid(-dot(t, m.context(n)));
  return obj;
}

PairGradient pair_gradient(const EmbeddingModel& m, std::size_t w, std::size_t ctx,
                           std::span<const std::size_t> negatives) {
  check_rows(m, w, ctx, negatives);
  const auto t = m.target(w);
  PairGradient g;
  g.grad_target.assign(m.dim(), 0.0);
  auto add = [&](std::size_t row, double coef) {
    const auto c = m.context(row);
    for (std::size_t d = 0; d < m.dim(); ++d) g.grad_target[d] += coef * c[d];
    std::vector<double> gc(t.begin(), t.end());
    for (auto& x : gc) x *= coef;
    g.grad_context.push_back(std::move(gc));
  };
  add(ctx, sigmoid(-dot(t, m.context(ctx))));
  for (auto n : negatives) add(n, -sigmoid(dot(t, m.context(n))));
  return g;
}

// ---------------------------------------------------------------------------
// Update kernel

namespace {

template <bool Concurrent>
double load(const double& x) noexcept {
  if constexpr (Concurrent) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Concurrent>
void store(double& x, double v) noexcept {
  if constexpr (Concurrent) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

struct Scratch {
  std::vector<double> t, grad, coef;
};

/// One exact gradient step on raw row storage. `step` is sign * lr.
template <bool Concurrent>
double step_kernel(double* targets, double* contexts, std::size_t dim, std::size_t w, std::size_t ctx,
                   std::span<const std::size_t> negatives, double step, Scratch& s) {
  double* tw = targets + w * dim;
  s.t.resize(dim);
  s.grad.assign(dim, 0.0);
  s.coef.resize(negatives.size() + 1);
  for (std::size_t d = 0; d < dim; ++d) s.t[d] = load<Concurrent>(tw[d]);

  double obj = 0.0;
  for (std::size_t i = 0; i <= negatives.size(); ++i) {
    const double* c = contexts + (i == 0 ? ctx : negatives[i - 1]) * dim;
    double score = 0.0;
    for (std::size_t d = 0; d < dim; ++d) score += s.t[d] * load<Concurrent>(c[d]);
    if (i == 0) {
      obj += log_sigmoid(score);
      s.coef[i] = sigmoid(-score);
    } else {
      obj += log_sigmoid(-score);
      s.coef[i] = -sigmoid(score);
    }
    for (std::size_t d = 0; d < dim; ++d) s.grad[d] += s.coef[i] * load<Concurrent>(c[d]);
  }
  for (std::size_t i = 0; i <= negatives.size(); ++i) {
    double* c = contexts + (i == 0 ? ctx : negatives[i - 1]) * dim;
    const double g = step * s.coef[i];
    for (std::size_t d = 0; d < dim; ++d) store<Concurrent>(c[d], load<Concurrent>(c[d]) + g * s.t[d]);
  }
  for (std::size_t d = 0; d < dim; ++d) store<Concurrent>(tw[d], s.t[d] + step * s.grad[d]);
  return obj;
}

}  // namespace

double sgns_pair_step(EmbeddingModel& m, std::size_t w, std::size_t ctx,
                      std::span<const std::size_t> negatives, double lr, int sign) {
  check_rows(m, w, ctx, negatives);
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  Scratch s;
  return step_kernel<false>(m.target(0).data(), m.context(0).data(), m.dim(), w, ctx, negatives,
                            sign * lr, s);
}

// ---------------------------------------------------------------------------
// Training passes

std::uint64_t trained_pairs(std::uint64_t length, std::uint32_t window, std::uint32_t shared_prefix) noexcept {
  return pairs_in_walk(length, window) - pairs_in_walk(std::min<std::uint64_t>(shared_prefix, length), window);
}

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

struct Phase {
  const WalkCorpus* corpus;
  const NoiseDistribution* noise;
  int sign;
  bool skip_shared;
  std::uint64_t tag;
};

std::vector<std::size_t> corpus_rows(const EmbeddingModel& m, const WalkCorpus& corpus) {
  const auto& s = corpus.source();
  std::vector<std::size_t> rows(s.num_vertices(), kNoRow);
  for (auto v : corpus.tokens()) {
    if (rows[v] == kNoRow) rows[v] = m.row(s.label(v));
  }
  return rows;
}

std::vector<std::size_t> noise_rows(const EmbeddingModel& m, const NoiseDistribution& d) {
  std::vector<std::size_t> rows(d.size(), kNoRow);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.prob(i) > 0.0) rows[i] = m.row(d.label(i));
  }
  return rows;
}

std::uint64_t phase_pairs(const Phase& p) {
  std::uint64_t n = 0;
  const auto& c = *p.corpus;
  for (std::size_t i = 0; i < c.size(); ++i) {
    n += p.skip_shared ? trained_pairs(c.walk(i).size(), c.window(), c.shared_prefix(i))
                       : pairs_in_walk(c.walk(i).size(), c.window());
  }
  return n;
}

class Trainer {
 public:
  Trainer(EmbeddingModel& m, const TrainConfig& cfg, std::uint64_t total_pairs,
          std::vector<std::size_t>* negative_log)
      : m_(m), cfg_(cfg), total_(total_pairs), log_(negative_log) {}

  /// Returns (pairs, objective sum).
  std::pair<std::uint64_t, double> run(const Phase& phase, std::uint32_t epoch) {
    const auto& corpus = *phase.corpus;
    if (corpus.empty()) return {0, 0.0};
    const auto rows = corpus_rows(m_, corpus);
    const auto negatives = noise_rows(m_, *phase.noise);

    // Visit walks in a seeded order; learning rates follow the visiting order.
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 shuffler(hash_combine(cfg_.seed, phase.tag, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffler.below(i)]);
    std::vector<std::uint64_t> offset(order.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto w = order[i];
      offset[i + 1] = offset[i] + (phase.skip_shared
                                       ? trained_pairs(corpus.walk(w).size(), corpus.window(), corpus.shared_prefix(w))
                                       : pairs_in_walk(corpus.walk(w).size(), corpus.window()));
    }

    const unsigned threads = std::max(1u, cfg_.threads);
    std::vector<double> objective(threads, 0.0);
    auto shard = [&](std::size_t chunk, std::size_t b, std::size_t e) {
      if (threads > 1) {
        objective[chunk] = process<true>(phase, epoch, rows, negatives, order, offset, b, e);
      } else {
        objective[chunk] = process<false>(phase, epoch, rows, negatives, order, offset, b, e);
      }
    };
    detail::parallel_chunks(order.size(), threads, threads, shard);
    const std::uint64_t pairs = offset.back();
    done_ += pairs;
    return {pairs, std::accumulate(objective.begin(), objective.end(), 0.0)};
  }

 private:
  template <bool Concurrent>
  double process(const Phase& phase, std::uint32_t epoch, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& noise, const std::vector<std::size_t>& order,
                 const std::vector<std::uint64_t>& offset, std::size_t b, std::size_t e) {
    const auto& corpus = *phase.corpus;
    const auto c = static_cast<std::ptrdiff_t>(corpus.window());
    const std::size_t dim = m_.dim();
    double* targets = m_.target(0).data();
    double* contexts = m_.context(0).data();
    const double step_sign = phase.sign;
    Scratch scratch;
    std::vector<std::size_t> negs(cfg_.k);
    double objective = 0.0;
    for (std::size_t pos = b; pos < e; ++pos) {
      const auto wi = order[pos];
      const auto walk = corpus.walk(wi);
      const auto prefix = phase.skip_shared ? static_cast<std::ptrdiff_t>(corpus.shared_prefix(wi)) : 0;
      SplitMix64 rng(hash_combine(cfg_.seed, phase.tag, epoch, wi));
      std::uint64_t p = done_ + offset[pos];
      const auto len = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - c); j <= std::min(len - 1, i + c); ++j) {
          if (j == i || std::max(i, j) < prefix) continue;
          const double frac = static_cast<double>(p++) / static_cast<double>(total_);
          const double lr = std::max(cfg_.alpha_min, cfg_.alpha0 - (cfg_.alpha0 - cfg_.alpha_min) * frac);
          for (auto& n : negs) n = noise[phase.noise->sample(rng)];
          if (log_) log_->insert(log_->end(), negs.begin(), negs.end());
          objective += step_kernel<Concurrent>(targets, contexts, dim, rows[walk[i]], rows[walk[j]], negs,
                                               step_sign * lr, scratch);
        }
      }
    }
    return objective;
  }

  EmbeddingModel& m_;
  const TrainConfig& cfg_;
  std::uint64_t total_;
  std::uint64_t done_ = 0;
  std::vector<std::size_t>* log_;
};

TrainStats run_phases(EmbeddingModel& m, std::span<const Phase> phases, const TrainConfig& cfg,
                      std::vector<std::size_t>* negative_log) {
  cfg.validate();
  if (negative_log && cfg.threads > 1) throw std::invalid_argument("negative logging requires one thread");
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t total = 0;
  for (const auto& p : phases) total += phase_pairs(p) * cfg.epochs;
  TrainStats stats;
  Trainer trainer(m, cfg, std::max<std::uint64_t>(total, 1), negative_log);
  double objective = 0.0;
  for (const auto& p : phases) {
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      auto [pairs, obj] = trainer.run(p, epoch);
      (p.sign > 0 ? stats.pairs_ascended : stats.pairs_descended) += pairs;
      stats.pairs_processed += pairs;
      objective += obj;
    }
  }
  if (stats.pairs_processed) stats.mean_pair_objective = objective / static_cast<double>(stats.pairs_processed);
  stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

}  // namespace

TrainStats train_batch(EmbeddingModel& m, const WalkCorpus& corpus, const NoiseDistribution& dist,
                       const TrainConfig& cfg) {
  const Phase phase{&corpus, &dist, +1, false, 0};
  return run_phases(m, std::span(&phase, 1), cfg, nullptr);
}

TrainStats train_incremental(EmbeddingModel& m, const WalkCorpus& vanished, const WalkCorpus& added,
                             const NoiseDistribution& q_old, const NoiseDistribution& q_new,
                             const TrainConfig& cfg, bool descend_with_old_noise,
                             std::vector<std::size_t>* negative_log) {
  const Phase phases[] = {
      {&vanished, descend_with_old_noise ? &q_old : &q_new, -1, true, 1},
      {&added, &q_new, +1, true, 2},
  };
  return run_phases(m, phases, cfg, negative_log);
}

}  // namespace isgns
