#include "isgns/theory_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "isgns/random.hpp"
#include "isgns/synthetic.hpp"
#include "parallel.hpp"

namespace isgns {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

double psi_minus(std::span<const double> t, std::span<const double> c) noexcept { return log_sigmoid(-dot(t, c)); }

/// q(label of row) for every model row.
std::vector<double> q_by_row(const EmbeddingModel& m, const NoiseDistribution& q) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.prob(i) > 0.0) out[m.row(q.label(i))] = q.prob(i);
  }
  return out;
}

/// Rows grouped by bit-identical target vectors.
struct TargetGroups {
  std::vector<std::size_t> group_of;  // row -> group
  std::vector<std::size_t> first;     // group -> representative row
  std::vector<std::size_t> members;   // group -> row count
};

TargetGroups group_targets(const EmbeddingModel& m) {
  TargetGroups g;
  g.group_of.resize(m.size());
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < m.size(); ++r) {
    const auto t = m.target(r);
    std::string key(reinterpret_cast<const char*>(t.data()), t.size_bytes());
    auto [it, fresh] = seen.emplace(std::move(key), g.first.size());
    if (fresh) {
      g.first.push_back(r);
      g.members.push_back(0);
    }
    g.group_of[r] = it->second;
    ++g.members[it->second];
  }
  return g;
}

/// sum_v q(v) psi-(t, v) for a target row.
double noise_expectation(const EmbeddingModel& m, std::size_t row, const std::vector<double>& q) {
  const auto t = m.target(row);
  double s = 0.0;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (q[v] != 0.0) s += q[v] * psi_minus(t, m.context(v));
  }
  return s;
}

std::vector<std::size_t> rows_of(const EmbeddingModel& m, const WalkCorpus& corpus) {
  const auto& s = corpus.source();
  std::vector<std::size_t> rows(s.num_vertices(), 0);
  std::vector<char> used(s.num_vertices(), 0);
  for (auto v : corpus.tokens()) used[v] = 1;
  for (VertexId v = 0; v < s.num_vertices(); ++v) {
    if (used[v]) rows[v] = m.row(s.label(v));
  }
  return rows;
}

/// Per model row: sum over positions holding that row of |J(i)|.
std::vector<double> window_weights(const EmbeddingModel& m, const WalkCorpus& corpus,
                                   const std::vector<std::size_t>& rows) {
  std::vector<double> w(m.size(), 0.0);
  const std::uint64_t c = corpus.window();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto walk = corpus.walk(i);
    const std::uint64_t len = walk.size();
    for (std::uint64_t p = 0; p < len; ++p) {
      w[rows[walk[p]]] += static_cast<double>(std::min(c, p) + std::min(c, len - 1 - p));
    }
  }
  return w;
}

/// sum_i sum_{j in J(i)} [psi+(w_i, w_{i+j}) + k E_q psi-(w_i, .)], undivided.
double corpus_term(const EmbeddingModel& m, const WalkCorpus& corpus, const std::vector<double>& q, std::uint32_t k) {
  const auto rows = rows_of(m, corpus);
  const auto c = static_cast<std::ptrdiff_t>(corpus.window());
  double positive = 0.0;
  for (std::size_t wi = 0; wi < corpus.size(); ++wi) {
    const auto walk = corpus.walk(wi);
    const auto len = static_cast<std::ptrdiff_t>(walk.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const auto t = m.target(rows[walk[i]]);
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - c); j <= std::min(len - 1, i + c); ++j) {
        if (j != i) positive += log_sigmoid(dot(t, m.context(rows[walk[j]])));
      }
    }
  }
  const auto weights = window_weights(m, corpus, rows);
  const auto groups = group_targets(m);
  std::vector<double> group_weight(groups.first.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r) group_weight[groups.group_of[r]] += weights[r];
  double negative = 0.0;
  for (std::size_t g = 0; g < groups.first.size(); ++g) {
    if (group_weight[g] != 0.0) negative += group_weight[g] * noise_expectation(m, groups.first[g], q);
  }
  return positive + k * negative;
}

}  // namespace

double objective_sgns(const EmbeddingModel& m, const WalkCorpus& corpus, const NoiseDistribution& q, std::uint32_t k) {
  if (corpus.token_count() == 0) throw std::invalid_argument("objective of an empty corpus");
  return -corpus_term(m, corpus, q_by_row(m, q), k) / static_cast<double>(corpus.token_count());
}

double objective_isgns(const EmbeddingModel& m, const WalkCorpus& old_corpus, const WalkCorpus& added,
                       const WalkCorpus& vanished, const NoiseDistribution& q_old,
                       const NoiseDistribution& q_new, std::uint32_t k) {
  if (old_corpus.token_count() == 0) throw std::invalid_argument("objective of an empty corpus");
  const auto qo = q_by_row(m, q_old);
  const auto qn = q_by_row(m, q_new);
  double total = corpus_term(m, old_corpus, qo, k) / static_cast<double>(old_corpus.token_count());
  if (added.token_count()) total += corpus_term(m, added, qn, k) / static_cast<double>(added.token_count());
  if (vanished.token_count()) total -= corpus_term(m, vanished, qn, k) / static_cast<double>(vanished.token_count());
  return -total;
}

double delta_closed_form(const EmbeddingModel& m, const WalkCorpus& old_corpus, const NoiseDistribution& q_old,
                         const NoiseDistribution& q_new, std::uint32_t k) {
  if (old_corpus.token_count() == 0) throw std::invalid_argument("objective of an empty corpus");
  const auto qo = q_by_row(m, q_old);
  const auto qn = q_by_row(m, q_new);
  std::vector<double> dq(m.size());
  for (std::size_t v = 0; v < m.size(); ++v) dq[v] = qn[v] - qo[v];

  const auto weights = window_weights(m, old_corpus, rows_of(m, old_corpus));
  const auto groups = group_targets(m);
  std::vector<double> group_weight(groups.first.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r) group_weight[groups.group_of[r]] += weights[r];
  double sum = 0.0;
  for (std::size_t g = 0; g < groups.first.size(); ++g) {
    if (group_weight[g] != 0.0) sum += group_weight[g] * noise_expectation(m, groups.first[g], dq);
  }
  return -static_cast<double>(k) * sum / static_cast<double>(old_corpus.token_count());
}

double psi_max(const EmbeddingModel& m) {
  const auto groups = group_targets(m);
  double best = 0.0;
  for (auto r : groups.first) {
    for (std::size_t v = 0; v < m.size(); ++v) best = std::max(best, -psi_minus(m.target(r), m.context(v)));
  }
  return best;
}

ObjectiveReport objective_difference(const EmbeddingModel& m, const WalkCorpus& old_corpus,
                                     const NoiseDistribution& q_old, const NoiseDistribution& q_new,
                                     std::uint32_t k) {
  ObjectiveReport r;
  r.n = old_corpus.token_count();
  r.L_sgns = objective_sgns(m, old_corpus, q_new, k);
  r.L_isgns = -corpus_term(m, old_corpus, q_by_row(m, q_old), k) / static_cast<double>(r.n);
  r.delta = delta_closed_form(m, old_corpus, q_old, q_new, k);
  r.delta_check = r.L_sgns - r.L_isgns;
  r.psi_max = psi_max(m);
  r.bound = 2.0 * old_corpus.window() * k / static_cast<double>(r.n) * r.psi_max;
  const double scale = std::max({1.0, std::abs(r.L_sgns), std::abs(r.L_isgns)});
  if (std::abs(r.delta - r.delta_check) > 1e-9 * scale) {
    throw std::logic_error("closed-form objective difference disagrees with the direct difference");
  }
  return r;
}

double second_moment_bound(const EmbeddingModel& m, const WalkConfig& walk, std::uint32_t k) {
  const double c = walk.window, L = walk.length, T = walk.walks_per_vertex;
  const double factor = 24.0 * c * c * k * k / (L * L * T * T);
  const auto groups = group_targets(m);
  double sum = 0.0;
  for (std::size_t g = 0; g < groups.first.size(); ++g) {
    double row = 0.0;
    for (std::size_t v = 0; v < m.size(); ++v) {
      const double p = psi_minus(m.target(groups.first[g]), m.context(v));
      row += p * p;
    }
    sum += static_cast<double>(groups.members[g]) * row;
  }
  return factor * sum;
}

double realized_delta(const EmbeddingModel& m, const Snapshot& old_snapshot, const Snapshot& new_snapshot,
                      const WalkConfig& walk, std::uint32_t k) {
  const auto corpus = generate_corpus(old_snapshot, walk);
  const auto f_old = count_frequencies(corpus);
  const auto inc = generate_incremental_corpora(old_snapshot, new_snapshot, diff_snapshots(old_snapshot, new_snapshot), walk);
  const auto f_new = update_frequencies(f_old, inc.added, inc.vanished);
  return delta_closed_form(m, corpus, build_distribution(f_old), build_distribution(f_new), k);
}

// ---------------------------------------------------------------------------
// Moments

void MomentConfig::validate() const {
  walk.validate();
  if (sizes.empty() || churn_rates.empty()) throw std::invalid_argument("need at least one size and one churn rate");
  for (auto n : sizes) {
    if (n < 10) throw std::invalid_argument("network sizes must be at least 10");
  }
  for (double r : churn_rates) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("churn rates must lie in [0, 1)");
  }
  if (!(average_degree >= 1.0)) throw std::invalid_argument("average degree must be at least 1");
  if (trials < 1 || dim < 1 || prototypes < 1 || k < 1) {
    throw std::invalid_argument("trials, dim, prototypes and k must be positive");
  }
}

namespace {

Snapshot moment_graph(const MomentConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (cfg.generator == GraphModel::BarabasiAlbert) {
    const auto attach = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.average_degree / 2)));
    return barabasi_albert(n, attach, seed);
  }
  const auto m = static_cast<std::size_t>(std::llround(cfg.average_degree * static_cast<double>(n) / 2));
  return erdos_renyi(n, std::min(m, n * (n - 1) / 2), seed);
}

/// Scores t.c have unit variance: components are U[-a, a] with a = sqrt(3) / dim^(1/4).
EmbeddingModel moment_model(const MomentConfig& cfg, std::size_t n, std::uint64_t seed) {
  const double a = std::sqrt(3.0) / std::pow(static_cast<double>(cfg.dim), 0.25);
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> protos(cfg.prototypes, std::vector<double>(cfg.dim));
  for (auto& p : protos) {
    for (auto& x : p) x = a * (2.0 * rng.uniform() - 1.0);
  }
  EmbeddingModel m(cfg.dim);
  std::vector<double> ctx(cfg.dim);
  for (std::size_t v = 0; v < n; ++v) {
    const auto label = std::to_string(v);
    SplitMix64 own(hash_combine(seed, label_hash(label)));
    for (auto& x : ctx) x = a * (2.0 * own.uniform() - 1.0);
    m.add_row(label, protos[own.below(cfg.prototypes)], ctx);
  }
  return m;
}

}  // namespace

MomentReport estimate_moments(const MomentConfig& cfg) {
  cfg.validate();
  MomentReport report;
  const std::size_t rates = cfg.churn_rates.size();
  for (std::size_t n : cfg.sizes) {
    const auto model = moment_model(cfg, n, hash_combine(cfg.seed, n, 0));
    const double eps = psi_max(model);
    const double bound2 = second_moment_bound(model, cfg.walk, cfg.k);

    std::vector<double> delta(cfg.trials * rates, 0.0);
    std::vector<double> positions(cfg.trials, 0.0);
    detail::parallel_chunks(cfg.trials, cfg.trials, cfg.threads, [&](std::size_t t, std::size_t, std::size_t) {
      const auto g = moment_graph(cfg, n, hash_combine(cfg.seed, n, t, 1));
      WalkConfig walk = cfg.walk;
      walk.seed = hash_combine(cfg.seed, n, t, 2);
      walk.threads = 1;
      const auto corpus = generate_corpus(g, walk);
      positions[t] = static_cast<double>(corpus.token_count());
      const auto f_old = count_frequencies(corpus);
      const auto q_old = build_distribution(f_old);
      for (std::size_t r = 0; r < rates; ++r) {
        const auto diff = synthesize_churn(g, cfg.churn_rates[r], hash_combine(cfg.seed, n, t, 3));
        if (diff.empty()) continue;
        const auto g_new = apply_diff(g, diff);
        const auto inc = generate_incremental_corpora(g, g_new, diff, walk);
        const auto q_new = build_distribution(update_frequencies(f_old, inc.added, inc.vanished));
        delta[t * rates + r] = delta_closed_form(model, corpus, q_old, q_new, cfg.k);
      }
    });

    double mean_n = 0.0, mean_bound1 = 0.0;
    for (double p : positions) {
      mean_n += p;
      mean_bound1 += 2.0 * cfg.walk.window * cfg.k / p * eps;
    }
    mean_n /= cfg.trials;
    mean_bound1 /= cfg.trials;
    for (std::size_t r = 0; r < rates; ++r) {
      MomentRow row;
      row.vertices = n;
      row.positions = mean_n;
      row.churn_rate = cfg.churn_rates[r];
      row.second_moment_bound = bound2;
      row.mean_first_bound = mean_bound1;
      row.trials = cfg.trials;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const double d = delta[t * rates + r];
        s1 += d;
        s2 += d * d;
        if (std::abs(d) > 2.0 * cfg.walk.window * cfg.k / positions[t] * eps) ++row.bound_violations;
      }
      row.first_moment = s1 / cfg.trials;
      row.second_moment = s2 / cfg.trials;
      if (cfg.trials > 1) {
        const double var = std::max(0.0, (s2 - s1 * s1 / cfg.trials) / (cfg.trials - 1));
        row.first_stderr = std::sqrt(var / cfg.trials);
      }
      report.rows.push_back(row);
    }
  }

  for (std::size_t r = 0; r < rates; ++r) {
    std::vector<double> x, y;
    for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
      const auto& row = report.rows[s * rates + r];
      x.push_back(row.positions);
      y.push_back(std::abs(row.first_moment));
    }
    if (x.size() >= 2 && std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; })) {
      report.slopes[cfg.churn_rates[r]] = loglog_slope(x, y);
    }
  }
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("slope fit needs distinct x values");
  return (n * sxy - sx * sy) / den;
}

void write_moment_report(const MomentReport& r, std::ostream& out) {
  out << "vertices rate positions E[delta] E[delta^2] stderr bound2 bound1 violations trials\n";
  for (const auto& row : r.rows) {
    out << row.vertices << ' ' << format_double(row.churn_rate) << ' ' << format_double(row.positions) << ' '
        << format_double(row.first_moment) << ' ' << format_double(row.second_moment) << ' '
        << format_double(row.first_stderr) << ' ' << format_double(row.second_moment_bound) << ' '
        << format_double(row.mean_first_bound) << ' ' << row.bound_violations << ' ' << row.trials << '\n';
  }
  for (const auto& [rate, slope] : r.slopes) {
    out << "slope " << format_double(rate) << ' ' << format_double(slope) << '\n';
  }
}

void write_moment_data(const MomentReport& r, std::ostream& out) {
  out << "# vertices rate E[delta] E[delta^2] bound2\n";
  for (const auto& row : r.rows) {
    out << row.vertices << ' ' << format_double(row.churn_rate) << ' ' << format_double(row.first_moment) << ' '
        << format_double(row.second_moment) << ' ' << format_double(row.second_moment_bound) << '\n';
  }
}

}  // namespace isgns
