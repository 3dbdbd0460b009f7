// One line per acceptance criterion. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isgns/cli.hpp"
#include "isgns/eval_suite.hpp"
#include "isgns/pipeline.hpp"
#include "isgns/random.hpp"
#include "isgns/synthetic.hpp"
#include "isgns/theory_lab.hpp"

using namespace isgns;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void randomize(EmbeddingModel& m, std::uint64_t seed, double scale) {
  SplitMix64 rng(seed);
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (auto& x : m.target(r)) x = scale * (2.0 * rng.uniform() - 1.0);
    for (auto& x : m.context(r)) x = scale * (2.0 * rng.uniform() - 1.0);
  }
}

std::vector<std::string> labels_of(const Snapshot& s) { return {s.labels().begin(), s.labels().end()}; }

// 1 -------------------------------------------------------------------------
Outcome gradient_oracle() {
  const auto start = Clock::now();
  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t state = 0; state < 100; ++state) {
    std::vector<std::string> vs;
    for (int i = 0; i < 8; ++i) vs.push_back(std::to_string(i));
    auto m = init_model(vs, 8, state);
    randomize(m, 7000 + state, 1.0);
    SplitMix64 rng(state + 1);
    const std::size_t w = rng.below(8), ctx = rng.below(8);
    std::vector<std::size_t> negs;
    for (int i = 0; i < 5; ++i) negs.push_back(rng.below(8));
    const auto g = pair_gradient(m, w, ctx, negs);
    std::map<std::size_t, std::vector<double>> by_row;
    std::vector<std::size_t> rows{ctx};
    rows.insert(rows.end(), negs.begin(), negs.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& acc = by_row[rows[i]];
      acc.resize(8, 0.0);
      for (std::size_t d = 0; d < 8; ++d) acc[d] += g.grad_context[i][d];
    }
    double diff2 = 0.0, norm2 = 0.0;
    auto probe = [&](double& x, double analytic) {
      const double saved = x;
      x = saved + h;
      const double up = pair_objective(m, w, ctx, negs);
      x = saved - h;
      const double down = pair_objective(m, w, ctx, negs);
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (numeric - analytic) * (numeric - analytic);
      norm2 += analytic * analytic;
    };
    for (std::size_t d = 0; d < 8; ++d) probe(m.target(w)[d], g.grad_target[d]);
    for (const auto& [row, grad] : by_row) {
      for (std::size_t d = 0; d < 8; ++d) probe(m.context(row)[d], grad[d]);
    }
    worst = std::max(worst, std::sqrt(diff2 / norm2));
  }
  const double t = seconds_since(start);
  return {worst < 1e-5 && t < 5.0, "max relative error " + num(worst) + ", " + num(t, 3) + " s"};
}

// 2 -------------------------------------------------------------------------
Outcome objective_consistency() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto s = erdos_renyi(20, 40 + i % 20, i);
    auto t = apply_diff(s, synthesize_churn(s, 0.1 + 0.002 * i, i + 500));
    WalkConfig cfg;
    cfg.length = 20;
    cfg.walks_per_vertex = 4;
    cfg.window = 1 + i % 5;
    cfg.seed = i;
    const auto old_corpus = generate_corpus(s, cfg);
    const auto f_old = count_frequencies(old_corpus);
    const auto inc = generate_incremental_corpora(s, t, diff_snapshots(s, t), cfg);
    const auto q_old = build_distribution(f_old);
    const auto q_new = build_distribution(update_frequencies(f_old, inc.added, inc.vanished));
    auto m = init_model(labels_of(s), 8, i);
    randomize(m, 100 + i, 0.8);
    const std::uint32_t k = 1 + i % 7;
    const double delta = delta_closed_form(m, old_corpus, q_old, q_new, k);
    const double direct = objective_sgns(m, old_corpus, q_new, k) - objective_sgns(m, old_corpus, q_old, k);
    worst = std::max(worst, std::abs(delta - direct));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-9 && t < 30.0, "max |closed form - difference| " + num(worst) + ", " + num(t, 3) + " s"};
}

// 3 -------------------------------------------------------------------------
Outcome first_bound() {
  const auto start = Clock::now();
  int violations = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    SplitMix64 rng(hash_combine(31, i));
    const std::size_t n = 20 + rng.below(61);
    const std::size_t edges = n + rng.below(3 * n);
    auto s = (i % 2) ? erdos_renyi(n, edges, i) : barabasi_albert(n, 1 + rng.below(4), i);
    const double rate = 0.01 + 0.2 * rng.uniform();
    auto t = apply_diff(s, synthesize_churn(s, rate, i + 1));
    WalkConfig cfg;
    cfg.length = 10 + static_cast<std::uint32_t>(rng.below(31));
    cfg.walks_per_vertex = 1 + static_cast<std::uint32_t>(rng.below(5));
    cfg.window = 1 + static_cast<std::uint32_t>(rng.below(5));
    cfg.seed = i;
    const auto old_corpus = generate_corpus(s, cfg);
    const auto f_old = count_frequencies(old_corpus);
    const auto inc = generate_incremental_corpora(s, t, diff_snapshots(s, t), cfg);
    const auto q_old = build_distribution(f_old);
    const auto q_new = build_distribution(update_frequencies(f_old, inc.added, inc.vanished));
    auto m = init_model(labels_of(s), 8, i);
    randomize(m, 9000 + i, 0.1 + rng.uniform());
    const auto r = objective_difference(m, old_corpus, q_old, q_new, 1 + static_cast<std::uint32_t>(rng.below(10)));
    if (std::abs(r.delta) > r.bound) ++violations;
    worst_ratio = std::max(worst_ratio, std::abs(r.delta) / r.bound);
  }
  const double t = seconds_since(start);
  return {violations == 0 && t < 120.0, std::to_string(violations) + " of 1000 trials violate, max |delta|/bound " +
                                            num(worst_ratio) + ", " + num(t, 3) + " s"};
}

// 4, 5 ----------------------------------------------------------------------
struct Moments {
  MomentReport report;
  double seconds = 0.0;
  MomentConfig cfg;
};

Moments run_moments() {
  Moments m;
  m.cfg.sizes.clear();
  for (int i = 0; i <= 8; ++i) m.cfg.sizes.push_back(100u << i);
  m.cfg.churn_rates = {0.01, 0.05, 0.10, 0.15};
  m.cfg.trials = 30;
  m.cfg.walk.length = 20;
  m.cfg.walk.walks_per_vertex = 2;
  m.cfg.walk.window = 5;
  m.cfg.seed = 2024;
  const auto start = Clock::now();
  m.report = estimate_moments(m.cfg);
  m.seconds = seconds_since(start);
  return m;
}

Outcome first_moment_trend(const Moments& m) {
  bool slopes_ok = true;
  std::string slopes;
  for (const auto& [rate, slope] : m.report.slopes) {
    slopes_ok = slopes_ok && slope >= -2.5 && slope <= -1.5;
    slopes += (slopes.empty() ? "" : ", ") + num(rate, 2) + ":" + num(slope, 3);
  }
  int inversions = 0;
  const auto rates = m.cfg.churn_rates.size();
  for (std::size_t s = 0; s < m.cfg.sizes.size(); ++s) {
    for (std::size_t r = 1; r < rates; ++r) {
      const auto& lo = m.report.rows[s * rates + r - 1];
      const auto& hi = m.report.rows[s * rates + r];
      if (!(std::abs(lo.first_moment) < std::abs(hi.first_moment))) ++inversions;
    }
  }
  return {slopes_ok && inversions == 0 && m.seconds < 600.0,
          "slopes {" + slopes + "}, " + std::to_string(inversions) + " churn-order inversions, " + num(m.seconds, 3) +
              " s"};
}

Outcome second_moment_trend(const Moments& m) {
  int above = 0;
  double worst_spread = 0.0;
  const auto rates = m.cfg.churn_rates.size();
  for (std::size_t r = 0; r < rates; ++r) {
    double lo = INFINITY, hi = 0.0;
    for (std::size_t s = 0; s < m.cfg.sizes.size(); ++s) {
      const auto& row = m.report.rows[s * rates + r];
      if (!(row.second_moment < row.second_moment_bound)) ++above;
      if (row.vertices >= 1000) {
        lo = std::min(lo, row.second_moment);
        hi = std::max(hi, row.second_moment);
      }
    }
    worst_spread = std::max(worst_spread, hi / lo);
  }
  return {above == 0 && worst_spread < 10.0, std::to_string(above) + " cells above the bound, max spread over n >= 1000 " +
                                                 num(worst_spread, 3) + "x"};
}

// 6 -------------------------------------------------------------------------
Outcome incremental_frequencies() {
  auto g = erdos_renyi(100, 400, 6);
  WalkConfig cfg;
  cfg.length = 40;
  cfg.walks_per_vertex = 10;
  cfg.seed = 3;
  auto counts = count_frequencies(generate_corpus(g, cfg));
  int mismatches = 0;
  for (std::uint64_t step = 0; step < 10; ++step) {
    auto diff = synthesize_churn(g, 0.03, 40 + step);
    SnapshotBuilder b(apply_diff(g, diff));
    b.add_edge(std::to_string(step), "late-" + std::to_string(step));
    auto next = b.build();
    const auto full = diff_snapshots(g, next);
    auto inc = generate_incremental_corpora(g, next, full, cfg);
    counts = update_frequencies(counts, inc.added, inc.vanished);
    if (!(counts == count_frequencies(generate_corpus(next, cfg)))) ++mismatches;
    g = next;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 10 steps differ from a recount"};
}

// 7 -------------------------------------------------------------------------
Outcome quality_parity() {
  const auto start = Clock::now();
  const auto g0 = two_block_ring(500, 5, 250, 25, 7);
  const auto churn = synthesize_churn(g0, 0.01, 8);
  const auto g1 = apply_diff(g0, churn);
  const auto split = split_edges(g1, 0.5, 9);

  std::set<std::pair<std::string, std::string>> held;
  for (const auto& [u, v] : split.positives) held.emplace(u, v);
  SnapshotBuilder b0(g0);
  for (const auto& [u, v] : split.positives) b0.remove_edge(u, v);
  const auto r0 = b0.build();
  const auto& r1 = split.residual;

  EmbeddingConfig cfg;
  cfg.dim = 64;
  cfg.walk.length = 40;
  cfg.walk.walks_per_vertex = 10;
  cfg.walk.seed = 11;
  cfg.train.seed = 11;
  const auto base = train_full(r0, cfg);
  const auto inc = update_embeddings(base.checkpoint, r0, r1, cfg);
  const auto full = train_full(r1, cfg);
  const double auc_inc = link_prediction_auc(inc.checkpoint.model, split, EdgeOperator::Hadamard, 1.0, 12);
  const double auc_full = link_prediction_auc(full.checkpoint.model, split, EdgeOperator::Hadamard, 1.0, 12);
  const double t = seconds_since(start);
  const bool ok = std::abs(auc_inc - auc_full) <= 0.02 && auc_inc > 0.85 && auc_full > 0.85 && t < 300.0;
  return {ok, "AUC incremental " + num(auc_inc) + ", full " + num(auc_full) + ", " + num(t, 3) + " s"};
}

// 8 -------------------------------------------------------------------------
Outcome speedup() {
  const auto g = erdos_renyi(10000, 50000, 13);
  EmbeddingConfig cfg;
  cfg.dim = 64;
  cfg.walk.length = 80;
  cfg.walk.walks_per_vertex = 4;
  cfg.walk.seed = 5;
  cfg.train.seed = 5;
  const auto base = train_full(g, cfg);
  std::vector<double> speedups;
  std::string detail;
  for (double rate : {0.001, 0.005, 0.01, 0.02, 0.03, 0.04}) {
    const auto g1 = apply_diff(g, synthesize_churn(g, rate, 77));
    const auto inc = update_embeddings(base.checkpoint, g, g1, cfg);
    const auto full = train_full(g1, cfg);
    speedups.push_back(full.total_time / inc.stats.total_time);
    detail += (detail.empty() ? "" : ", ") + num(rate * 100, 2) + "%:" + num(speedups.back(), 3) + "x";
  }
  int inversions = 0;
  for (std::size_t i = 1; i < speedups.size(); ++i) inversions += speedups[i] > speedups[i - 1];
  return {speedups.front() >= 2.0 && inversions <= 1,
          "speedup {" + detail + "}, " + std::to_string(inversions) + " inversions"};
}

// 9 -------------------------------------------------------------------------
Outcome sampler_fidelity() {
  FrequencyTable t;
  SplitMix64 gen(99);
  std::set<std::string> zero;
  for (int v = 0; v < 1000; ++v) {
    const auto label = std::to_string(v);
    const std::uint64_t count = v % 10 == 0 ? 0 : 1 + 100000 / (1 + gen.below(1000));
    t.add(label, count);
    if (count == 0) zero.insert(label);
  }
  const auto d = build_distribution(t);
  SplitMix64 rng(1);
  std::vector<double> hist(d.size(), 0.0);
  const std::size_t draws = 1000000;
  for (auto i : sample_negative(d, rng, draws)) hist[i] += 1.0;
  double tv = 0.0, floor = 0.0;
  std::size_t zero_draws = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    tv += std::abs(hist[i] / draws - d.prob(i));
    floor += std::sqrt(d.prob(i) * (1.0 - d.prob(i)));
    if (zero.count(d.label(i))) zero_draws += static_cast<std::size_t>(hist[i]);
  }
  tv /= 2.0;
  // Expected distance of an exact sampler, from the normal approximation of each bin.
  floor *= 0.5 * std::sqrt(2.0 / (std::numbers::pi * static_cast<double>(draws)));
  return {tv < 0.01 && zero_draws == 0, "total variation " + num(tv) + " (exact sampler expects " + num(floor) +
                                            "), " + std::to_string(zero_draws) + " draws of zero-frequency vertices"};
}

// 10 ------------------------------------------------------------------------
Outcome locality() {
  const auto s = erdos_renyi(500, 1500, 17);
  const auto t = apply_diff(s, synthesize_churn(s, 0.002, 18));
  WalkConfig wc;
  wc.length = 10;
  wc.walks_per_vertex = 1;
  wc.window = 1;
  wc.seed = 19;
  const auto old_corpus = generate_corpus(s, wc);
  const auto f = count_frequencies(old_corpus);
  auto m = init_model(labels_of(s), 16, 1);
  train_batch(m, old_corpus, build_distribution(f), TrainConfig{});
  const auto inc = generate_incremental_corpora(s, t, diff_snapshots(s, t), wc);
  const auto q_old = build_distribution(f);
  const auto q_new = build_distribution(update_frequencies(f, inc.added, inc.vanished));
  const auto before = inherit_model(m, labels_of(t), 1);
  auto after = before;
  std::vector<std::size_t> negatives;
  TrainConfig tc;
  tc.k = 1;
  train_incremental(after, inc.vanished, inc.added, q_old, q_new, tc, false, &negatives);

  std::set<std::string> touched;
  for (const auto* c : {&inc.vanished, &inc.added}) {
    for (std::size_t i = 0; i < c->size(); ++i) {
      const auto w = c->walk(i);
      const std::int64_t p = c->shared_prefix(i), win = c->window(), len = w.size();
      for (std::int64_t a = 0; a < len; ++a) {
        for (std::int64_t b = std::max<std::int64_t>(0, a - win); b <= std::min(len - 1, a + win); ++b) {
          if (a != b && std::max(a, b) >= p) {
            touched.insert(c->source().label(w[a]));
            touched.insert(c->source().label(w[b]));
          }
        }
      }
    }
  }
  for (auto r : negatives) touched.insert(after.label(r));
  std::size_t untouched = 0, changed = 0;
  for (std::size_t r = 0; r < after.size(); ++r) {
    if (touched.count(after.label(r))) continue;
    ++untouched;
    const bool same = std::equal(after.target(r).begin(), after.target(r).end(), before.target(r).begin()) &&
                      std::equal(after.context(r).begin(), after.context(r).end(), before.context(r).begin());
    if (!same) ++changed;
  }
  return {changed == 0 && untouched > 0,
          std::to_string(changed) + " of " + std::to_string(untouched) + " untouched rows changed"};
}

// 11 ------------------------------------------------------------------------
Outcome auc_oracle() {
  SplitMix64 rng(23);
  int mismatches = 0;
  for (int set = 0; set < 50; ++set) {
    std::vector<double> pos(1 + rng.below(200)), neg(1 + rng.below(200));
    const auto levels = 2 + rng.below(set % 2 ? 10 : 100000);
    for (auto& v : pos) v = static_cast<double>(rng.below(levels)) / 3.0;
    for (auto& v : neg) v = static_cast<double>(rng.below(levels)) / 3.0;
    std::uint64_t twice = 0;
    for (double p : pos) {
      for (double n : neg) twice += p > n ? 2 : (p == n ? 1 : 0);
    }
    const double oracle = static_cast<double>(twice) / static_cast<double>(2 * pos.size() * neg.size());
    if (auc(pos, neg) != oracle) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 50 score sets differ from the pairwise count"};
}

// 12 ------------------------------------------------------------------------
int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "isgns");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, std::string> snapshot_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

Outcome reproducibility() {
  const auto dir = fs::temp_directory_path() / "isgns-acceptance-repro";
  auto p = [&](const std::string& leaf) { return (dir / leaf).string(); };
  const std::vector<std::string> one{"--threads", "1"};
  const std::vector<std::vector<std::string>> commands{
      {"generate", "--model", "two-block", "--vertices", "200", "-o", p("g.txt")},
      {"churn", p("g.txt"), "--rate", "0.02", "-o", p("g1.txt")},
      {"walk", p("g.txt"), "--length", "20", "--walks", "3", "-o", p("walks.txt")},
      {"train", p("g.txt"), "--length", "20", "--walks", "3", "--dim", "16", "-o", p("ck")},
      {"update", "--checkpoint", p("ck"), p("g.txt"), p("g1.txt"), "--length", "20", "--walks", "3", "--dim", "16",
       "-o", p("up")},
      {"moments", "--sizes", "50,100", "--rates", "0.05,0.1", "--length", "10", "--walks", "2", "--trials", "3",
       "--data", p("moments.dat"), "-o", p("moments.txt")},
      {"eval-link", p("g.txt"), "--length", "20", "--walks", "3", "--dim", "16", "-o", p("link.txt")},
  };
  std::map<std::string, std::string> runs[2];
  for (auto& run : runs) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (auto c : commands) {
      c.insert(c.end(), one.begin(), one.end());
      if (cli(c) != 0) return {false, "command " + c.front() + " failed"};
    }
    // eval-label reads the trained embeddings, so it runs last.
    {
      std::ofstream labels(p("labels.txt"));
      for (int v = 0; v < 200; ++v) labels << v << ' ' << (v < 100 ? 0 : 1) << '\n';
    }
    if (cli({"eval-label", "--embeddings", p("ck/embeddings.txt"), "--labels", p("labels.txt"), "-o", p("f1.txt")}) !=
        0) {
      return {false, "command eval-label failed"};
    }
    run = snapshot_files(dir);
  }
  fs::remove_all(dir);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) ++differing;
  }
  const bool ok = differing == 0 && runs[0].size() == runs[1].size();
  return {ok, std::to_string(differing) + " of " + std::to_string(runs[0].size()) +
                  " output files differ across two runs of 8 commands"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-34s %s  (%s)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "objective consistency", objective_consistency);
  report(3, "first-order bound", first_bound);
  Moments moments;
  std::string moment_error;
  try {
    moments = run_moments();
  } catch (const std::exception& e) {
    moment_error = e.what();
  }
  report(4, "first moment trend", [&] {
    if (!moment_error.empty()) throw std::runtime_error(moment_error);
    return first_moment_trend(moments);
  });
  report(5, "second moment trend", [&] {
    if (!moment_error.empty()) throw std::runtime_error(moment_error);
    return second_moment_trend(moments);
  });
  report(6, "incremental frequencies", incremental_frequencies);
  report(7, "quality parity", quality_parity);
  report(8, "speedup", speedup);
  report(9, "sampler fidelity", sampler_fidelity);
  report(10, "locality", locality);
  report(11, "auc oracle", auc_oracle);
  report(12, "reproducibility", reproducibility);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
