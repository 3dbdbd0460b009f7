#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "isgns/cli.hpp"
#include "isgns/eval_suite.hpp"
#include "isgns/pipeline.hpp"
#include "isgns/synthetic.hpp"
#include "isgns/theory_lab.hpp"
#include "manifest.hpp"

namespace isgns::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct WalkFlags {
  std::uint32_t length = 80;
  std::uint32_t walks = 10;
  std::uint32_t window = 5;
  double p = 1.0;
  double q = 1.0;
};

struct TrainFlags {
  std::size_t dim = 128;
  std::uint32_t negatives = 5;
  double alpha = 0.025;
  double alpha_min = 1e-4;
  std::uint32_t epochs = 1;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 10;
  std::string output;
};

void add_walk_flags(CLI::App* app, WalkFlags& w) {
  app->add_option("--length", w.length, "Vertices per walk")->check(CLI::Range(2u, 1u << 20));
  app->add_option("--walks", w.walks, "Walks per vertex")->check(CLI::PositiveNumber);
  app->add_option("--window", w.window, "Context window c")->check(CLI::PositiveNumber);
  app->add_option("--p", w.p, "node2vec return parameter")->check(CLI::PositiveNumber);
  app->add_option("--q", w.q, "node2vec in-out parameter")->check(CLI::PositiveNumber);
}

void add_train_flags(CLI::App* app, TrainFlags& t) {
  app->add_option("--dim", t.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  app->add_option("--negatives", t.negatives, "Negative samples per pair")->check(CLI::PositiveNumber);
  app->add_option("--alpha", t.alpha, "Initial learning rate")->check(CLI::PositiveNumber);
  app->add_option("--alpha-min", t.alpha_min, "Final learning rate")->check(CLI::PositiveNumber);
  app->add_option("--epochs", t.epochs, "Passes over the corpus")->check(CLI::PositiveNumber);
}

void add_common(CLI::App* app, Common& c, bool output_required = true) {
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* o = app->add_option("-o,--output", c.output, "Output path");
  if (output_required) o->required();
}

WalkConfig walk_config(const WalkFlags& w, const Common& c) {
  WalkConfig cfg;
  cfg.length = w.length;
  cfg.walks_per_vertex = w.walks;
  cfg.window = w.window;
  if (w.p != 1.0 || w.q != 1.0) cfg.bias = Node2vecBias{w.p, w.q};
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

EmbeddingConfig embedding_config(const WalkFlags& w, const TrainFlags& t, const Common& c) {
  EmbeddingConfig cfg;
  cfg.walk = walk_config(w, c);
  cfg.dim = t.dim;
  cfg.train.k = t.negatives;
  cfg.train.alpha0 = t.alpha;
  cfg.train.alpha_min = t.alpha_min;
  cfg.train.epochs = t.epochs;
  cfg.train.threads = c.threads;
  cfg.train.seed = c.seed;
  cfg.train.validate();
  return cfg;
}

/// Every option of the subcommand with its effective value.
json resolved_options(const CLI::App& app) {
  json j = json::object();
  for (const auto* opt : app.get_options()) {
    const auto& name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count()) {
      const auto& r = opt->results();
      if (r.size() == 1) {
        j[name] = r.front();
      } else {
        j[name] = r;
      }
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

RunManifest manifest_for(const CLI::App& app, const Common& c, std::vector<std::string> inputs) {
  RunManifest m;
  m.command = app.get_name();
  m.config = resolved_options(app);
  m.seeds["seed"] = c.seed;
  m.inputs = std::move(inputs);
  return m;
}

std::ofstream open_out(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("list", "bad number '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

std::string fmt(double x) { return format_double(x); }

/// Values of every subcommand option. Only one subcommand runs per invocation.
struct Options {
  std::string graph, checkpoint, old_graph, new_graph, embeddings, labels;
  std::string model = "er";
  std::size_t vertices = 1000, reach = 5, chords = 25, bridges = 10;
  double degree = 10.0;
  double rate = 0.01;
  std::string bench_rates = "0.001,0.005,0.01,0.02,0.03,0.04";
  std::string sizes = "100,200,400,800,1600", moment_rates = "0.01,0.05,0.1,0.15", generator = "er", data;
  MomentConfig mc;
  std::uint32_t moment_length = 80, moment_walks = 100, moment_window = 5;
  std::string op = "all";
  double lambda = 1.0;
  std::string mode = "both";
  std::size_t folds = 10;
};

using Handler = std::function<void()>;

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental skip-gram network embeddings"};
  app.set_version_flag("--version", ISGNS_VERSION);
  app.set_config("--config", "", "Read options from a key=value file (sections per command)");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Common common;
  WalkFlags wf;
  TrainFlags tf;
  Options opt;
  std::map<CLI::App*, Handler> handlers;

  // generate -----------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("generate", "Write a synthetic graph");
    sub->add_option("--model", opt.model, "er, ba, two-block or two-cliques")
        ->check(CLI::IsMember({"er", "ba", "two-block", "two-cliques"}));
    sub->add_option("--vertices", opt.vertices, "Vertex count")->check(CLI::Range(std::size_t{4}, std::size_t{1} << 28));
    sub->add_option("--degree", opt.degree, "Average degree (er, ba)")->check(CLI::PositiveNumber);
    sub->add_option("--reach", opt.reach, "Ring reach (two-block)");
    sub->add_option("--chords", opt.chords, "Random edges per block (two-block)");
    sub->add_option("--bridges", opt.bridges, "Edges between blocks (two-block)");
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      Snapshot g;
      if (opt.model == "er") {
        g = erdos_renyi(opt.vertices, static_cast<std::size_t>(std::llround(opt.degree * opt.vertices / 2)), common.seed);
      } else if (opt.model == "ba") {
        g = barabasi_albert(opt.vertices, std::max<std::size_t>(1, std::llround(opt.degree / 2)), common.seed);
      } else if (opt.model == "two-block") {
        g = two_block_ring(opt.vertices / 2, opt.reach, opt.chords, opt.bridges, common.seed);
      } else {
        g = two_cliques(opt.vertices / 2);
      }
      auto o = open_out(common.output);
      write_edge_list(g, o);
      manifest_for(*sub, common, {}).write(common.output + ".manifest.json");
    };
  }

  // churn --------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("churn", "Apply balanced random edge churn to a graph");
    sub->add_option("graph", opt.graph, "Edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--rate", opt.rate, "Fraction of edges changed")->check(CLI::Range(0.0, 0.999999));
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      const auto g = load_edge_list_file(opt.graph);
      const auto next = apply_diff(g, synthesize_churn(g, opt.rate, common.seed));
      auto o = open_out(common.output);
      write_edge_list(next, o);
      manifest_for(*sub, common, {opt.graph}).write(common.output + ".manifest.json");
    };
  }

  // walk ---------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("walk", "Generate a random-walk corpus");
    sub->add_option("graph", opt.graph, "Edge list")->required()->check(CLI::ExistingFile);
    add_walk_flags(sub, wf);
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      const auto g = load_edge_list_file(opt.graph);
      const auto corpus = generate_corpus(g, walk_config(wf, common));
      auto o = open_out(common.output);
      write_corpus(corpus, o);
      manifest_for(*sub, common, {opt.graph}).write(common.output + ".manifest.json");
      out << "walks " << corpus.size() << " tokens " << corpus.token_count() << '\n';
    };
  }

  // train --------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("train", "Train embeddings from scratch; writes a checkpoint directory");
    sub->add_option("graph", opt.graph, "Edge list")->required()->check(CLI::ExistingFile);
    add_walk_flags(sub, wf);
    add_train_flags(sub, tf);
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      const auto g = load_edge_list_file(opt.graph);
      const auto r = train_full(g, embedding_config(wf, tf, common));
      save_checkpoint(r.checkpoint, common.output);
      manifest_for(*sub, common, {opt.graph}).write(common.output + "/manifest.json");
      json stats = {{"walks", r.walks}, {"pairs", r.train.pairs_processed},
                    {"mean_pair_objective", r.train.mean_pair_objective}, {"walk_seconds", r.walk_time},
                    {"train_seconds", r.train.wall_time}, {"total_seconds", r.total_time}};
      auto s = open_out(common.output + "/timing.json");
      s << stats.dump(2) << '\n';
      out << "vertices " << r.checkpoint.model.size() << " pairs " << r.train.pairs_processed << " seconds "
          << fmt(r.total_time) << '\n';
    };
  }

  // update -------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("update", "Update a checkpoint from an old graph to a new graph");
    sub->add_option("--checkpoint", opt.checkpoint, "Checkpoint directory of the old graph")
        ->required()
        ->check(CLI::ExistingDirectory);
    sub->add_option("old", opt.old_graph, "Old edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("new", opt.new_graph, "New edge list")->required()->check(CLI::ExistingFile);
    add_walk_flags(sub, wf);
    add_train_flags(sub, tf);
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      const auto g_old = load_edge_list_file(opt.old_graph);
      const auto g_new = load_edge_list_file(opt.new_graph);
      const auto prev = load_checkpoint(opt.checkpoint);
      const auto r = update_embeddings(prev, g_old, g_new, embedding_config(wf, tf, common));
      save_checkpoint(r.checkpoint, common.output);
      const fs::path ck(opt.checkpoint);
      manifest_for(*sub, common,
                   {(ck / "embeddings.txt").string(), (ck / "context.txt").string(),
                    (ck / "frequencies.txt").string(), opt.old_graph, opt.new_graph})
          .write(common.output + "/manifest.json");
      const auto& st = r.stats;
      json stats = {{"added_vertices", st.added_vertices},     {"removed_vertices", st.removed_vertices},
                    {"added_edges", st.added_edges},           {"removed_edges", st.removed_edges},
                    {"affected_vertices", st.affected_vertices}, {"affected_fraction", st.affected_fraction},
                    {"walks_examined", st.walks_examined},     {"walks_resimulated", st.walks_resimulated},
                    {"vanished_walks", st.vanished_walks},     {"added_walks", st.added_walks},
                    {"pairs_descended", st.train.pairs_descended}, {"pairs_ascended", st.train.pairs_ascended}};
      auto s = open_out(common.output + "/stats.json");
      s << stats.dump(2) << '\n';
      json timing = {{"walk_seconds", st.walk_time},
                     {"train_seconds", st.train.wall_time},
                     {"total_seconds", st.total_time}};
      auto t = open_out(common.output + "/timing.json");
      t << timing.dump(2) << '\n';
      out << "affected " << st.affected_vertices << " vanished " << st.vanished_walks << " added "
          << st.added_walks << " seconds " << fmt(st.total_time) << '\n';
    };
  }

  // bench --------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("bench", "Time incremental updates against full retraining");
    sub->add_option("graph", opt.graph, "Edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--rates", opt.bench_rates, "Comma-separated churn rates");
    add_walk_flags(sub, wf);
    add_train_flags(sub, tf);
    add_common(sub, common, false);
    handlers[sub] = [&, sub] {
      const auto list = parse_list(opt.bench_rates);
      for (double r : list) {
        if (!(r >= 0.0 && r < 1.0)) throw CLI::ValidationError("--rates", "churn rates must lie in [0, 1)");
      }
      const auto cfg = embedding_config(wf, tf, common);
      const auto g = load_edge_list_file(opt.graph);
      const auto base = train_full(g, cfg);
      std::ostringstream table;
      table << "rate changed_edges affected_vertices t_inc t_full speedup\n";
      for (double r : list) {
        if (r == 0.0) {
          table << fmt(r) << " 0 0 - - skipped\n";
          continue;
        }
        const auto diff = synthesize_churn(g, r, hash_combine(common.seed, label_hash("bench")));
        const auto g_new = apply_diff(g, diff);
        const auto inc = update_embeddings(base.checkpoint, g, g_new, cfg);
        const auto full = train_full(g_new, cfg);
        table << fmt(r) << ' ' << diff.added_edges.size() + diff.removed_edges.size() << ' '
              << inc.stats.affected_vertices << ' ' << fmt(inc.stats.total_time) << ' ' << fmt(full.total_time)
              << ' ' << fmt(full.total_time / inc.stats.total_time) << '\n';
      }
      if (common.output.empty()) {
        out << table.str();
      } else {
        auto o = open_out(common.output);
        o << table.str();
        manifest_for(*sub, common, {opt.graph}).write(common.output + ".manifest.json");
      }
    };
  }

  // moments ------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("moments", "Monte-Carlo moments of the objective difference");
    sub->add_option("--sizes", opt.sizes, "Comma-separated vertex counts");
    sub->add_option("--rates", opt.moment_rates, "Comma-separated churn rates");
    sub->add_option("--generator", opt.generator, "er or ba")->check(CLI::IsMember({"er", "ba"}));
    sub->add_option("--degree", opt.mc.average_degree, "Average degree")->check(CLI::PositiveNumber);
    sub->add_option("--length", opt.moment_length, "Vertices per walk")->check(CLI::Range(2u, 1u << 20));
    sub->add_option("--walks", opt.moment_walks, "Walks per vertex")->check(CLI::PositiveNumber);
    sub->add_option("--window", opt.moment_window, "Context window c")->check(CLI::PositiveNumber);
    sub->add_option("--negatives", opt.mc.k, "Negative samples k")->check(CLI::PositiveNumber);
    sub->add_option("--trials", opt.mc.trials, "Trials per size")->check(CLI::PositiveNumber);
    sub->add_option("--dim", opt.mc.dim, "Parameter dimension")->check(CLI::PositiveNumber);
    sub->add_option("--prototypes", opt.mc.prototypes, "Distinct target vectors")->check(CLI::PositiveNumber);
    sub->add_option("--data", opt.data, "Also write a plot-ready data file");
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      opt.mc.generator = opt.generator == "ba" ? GraphModel::BarabasiAlbert : GraphModel::ErdosRenyi;
      opt.mc.sizes.clear();
      for (double s : parse_list(opt.sizes)) opt.mc.sizes.push_back(static_cast<std::size_t>(s));
      opt.mc.churn_rates = parse_list(opt.moment_rates);
      opt.mc.walk.length = opt.moment_length;
      opt.mc.walk.walks_per_vertex = opt.moment_walks;
      opt.mc.walk.window = opt.moment_window;
      opt.mc.seed = common.seed;
      opt.mc.threads = common.threads;
      const auto report = estimate_moments(opt.mc);
      auto o = open_out(common.output);
      write_moment_report(report, o);
      if (!opt.data.empty()) {
        auto d = open_out(opt.data);
        write_moment_data(report, d);
      }
      manifest_for(*sub, common, {}).write(common.output + ".manifest.json");
    };
  }

  // eval-link ----------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("eval-link", "Link prediction AUC with held-out edges");
    sub->add_option("graph", opt.graph, "Edge list")->required()->check(CLI::ExistingFile);
    sub->add_option("--operator", opt.op, "all, average, hadamard, weighted-l1 or weighted-l2")
        ->check(CLI::IsMember({"all", "average", "hadamard", "weighted-l1", "weighted-l2"}));
    sub->add_option("--lambda", opt.lambda, "L2 regularization")->check(CLI::NonNegativeNumber);
    add_walk_flags(sub, wf);
    add_train_flags(sub, tf);
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      const auto cfg = embedding_config(wf, tf, common);
      const auto g = load_edge_list_file(opt.graph);
      const auto split = split_edges(g, 0.5, common.seed);
      const auto model = train_full(split.residual, cfg).checkpoint.model;
      auto o = open_out(common.output);
      o << "operator auc\n";
      for (auto e : kEdgeOperators) {
        if (opt.op != "all" && opt.op != to_string(e)) continue;
        o << to_string(e) << ' ' << fmt(link_prediction_auc(model, split, e, opt.lambda, hash_combine(common.seed, 3)))
          << '\n';
      }
      manifest_for(*sub, common, {opt.graph}).write(common.output + ".manifest.json");
    };
  }

  // eval-label ---------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("eval-label", "Multi-label vertex classification F1");
    sub->add_option("--embeddings", opt.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
    sub->add_option("--labels", opt.labels, "Label file")->required()->check(CLI::ExistingFile);
    sub->add_option("--mode", opt.mode, "sweep, kfold or both")->check(CLI::IsMember({"sweep", "kfold", "both"}));
    sub->add_option("--folds", opt.folds, "Folds for kfold mode")->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
    sub->add_option("--lambda", opt.lambda, "L2 regularization")->check(CLI::NonNegativeNumber);
    add_common(sub, common);
    handlers[sub] = [&, sub] {
      auto ein = open_in(opt.embeddings);
      const auto model = load_embeddings(ein);
      auto lin = open_in(opt.labels);
      const auto label_map = read_labels(lin);
      std::vector<LabelRow> rows;
      if (opt.mode != "kfold") rows = label_fraction_sweep(model, label_map, opt.lambda, common.seed);
      if (opt.mode != "sweep") rows.push_back(label_kfold(model, label_map, opt.folds, opt.lambda, common.seed));
      auto o = open_out(common.output);
      o << "setting micro_f1 macro_f1\n";
      for (const auto& r : rows) o << r.setting << ' ' << fmt(r.f1.micro) << ' ' << fmt(r.f1.macro) << '\n';
      manifest_for(*sub, common, {opt.embeddings, opt.labels}).write(common.output + ".manifest.json");
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    for (auto* sub : app.get_subcommands()) handlers.at(sub)();
  } catch (const CLI::Error& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace isgns::cli
