#include "glaudio/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "glaudio/analysis.hpp"
#include "glaudio/config.hpp"
#include "glaudio/data_io.hpp"
#include "glaudio/error.hpp"
#include "glaudio/spectral.hpp"
#include "glaudio/trainer.hpp"
#include "glaudio/wav.hpp"
#include "glaudio/wave.hpp"

namespace glaudio {

namespace fs = std::filesystem;

namespace {

bool is_validation(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::TooLargeForOracle:
    case ErrorCode::TapeMismatch:
      return false;
    default:
      return true;
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string out_dir = ".";
  int verbosity = 0;

  fs::path path(const std::string& name) const {
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
  }
  void write_json(const std::string& name, const Json& j) const {
    std::ofstream f(path(name));
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path(name).string() + "'");
    f << j.dump(2) << '\n';
  }
  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name));
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path(name).string() + "'");
    f << text;
  }
  void note(const std::string& msg) const {
    if (verbosity > 0) err << msg << '\n';
  }
};

std::string resolve_data_path(const std::string& p) {
  if (p.empty() || fs::exists(p)) return p;
  if (const char* dir = std::getenv("GLAUDIO_DATA_DIR")) {
    for (const fs::path& cand : {fs::path(dir) / p, fs::path(dir) / fs::path(p).filename()}) {
      if (fs::exists(cand)) return cand.string();
    }
  }
  return p;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::istringstream ts(tok);
    T v{};
    if (!(ts >> v) || !ts.eof()) throw Error(ErrorCode::InvalidArgument, std::string("bad ") + what + " '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string("empty ") + what + " list");
  return out;
}

struct LoadedGraph {
  GraphBundle bundle;
  Graph graph;
  std::string provenance;
  std::vector<std::string> warnings;
};

LoadedGraph load_graph(const std::string& path, std::optional<std::uint64_t> split_seed = std::nullopt) {
  if (path.empty()) throw Error(ErrorCode::InvalidConfig, "no graph bundle given");
  LoadedGraph lg;
  lg.bundle = load_bundle(resolve_data_path(path));
  if (split_seed && lg.bundle.splits.empty()) lg.bundle = with_seeded_splits(std::move(lg.bundle), *split_seed);
  lg.provenance = split_provenance(lg.bundle);
  auto built = bundle_to_graph(lg.bundle);
  lg.graph = std::move(built.graph);
  lg.warnings = built.report.warnings;
  return lg;
}

LaplacianOperator make_operator(const Graph& g, const std::string& name, std::vector<std::string>& warnings) {
  auto op = build_operator(g, operator_variant_from_string(name));
  warnings.insert(warnings.end(), op.warnings.begin(), op.warnings.end());
  return op;
}

Json matrix_json(const NodeMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).data(), m.row(i).data() + m.cols()));
  return rows;
}

// ---- convert -------------------------------------------------------------

struct ConvertArgs {
  std::string content, cites, webkb_features, webkb_edges, synth, output;
  int n = 200, classes = 2, k = 4, chains = 200;
  double p_in = 0.1, p_out = 0.01, noise = 0.5;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> split_seed;
};

int do_convert(const Context& ctx, const ConvertArgs& a) {
  if (a.output.empty()) throw Error(ErrorCode::InvalidArgument, "--output is required");
  GraphBundle b;
  std::vector<std::string> warnings;
  if (!a.content.empty() || !a.cites.empty()) {
    if (a.content.empty() || a.cites.empty()) throw Error(ErrorCode::InvalidArgument, "--content needs --cites");
    auto r = load_content_cites(a.content, a.cites);
    b = std::move(r.bundle);
    warnings = r.warnings;
  } else if (!a.webkb_features.empty() || !a.webkb_edges.empty()) {
    if (a.webkb_features.empty() || a.webkb_edges.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--webkb-features needs --webkb-edges");
    }
    auto r = load_webkb(a.webkb_features, a.webkb_edges);
    b = std::move(r.bundle);
    warnings = r.warnings;
  } else if (a.synth == "sbm") {
    b = synth_sbm(a.n, a.classes, a.p_in, a.p_out, a.noise, a.seed);
  } else if (a.synth == "distance") {
    b = synth_distance_task(a.k, a.chains, a.seed);
  } else {
    throw Error(ErrorCode::InvalidArgument, "convert needs --content/--cites, --webkb-*, or --synth sbm|distance");
  }
  if (a.split_seed) b = with_seeded_splits(std::move(b), *a.split_seed);
  for (const auto& w : warnings) ctx.err << "warning: " << w << '\n';
  const fs::path out = fs::path(a.output).is_absolute() || fs::path(a.output).has_parent_path()
                           ? fs::path(a.output)
                           : ctx.path(a.output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_bundle(b, out.string());
  ctx.out << "wrote " << out.string() << " (n=" << b.num_nodes << ", edges=" << b.edges.size()
          << ", features=" << b.feature_dim << ")\n";
  return kExitOk;
}

// ---- encode --------------------------------------------------------------

struct EncodeArgs {
  std::string graph, op = "combinatorial";
  double h = 0.1, T = 0.0;
  int N = 10;
  std::vector<int> vertices;
  bool velocity = false;
};

int do_encode(const Context& ctx, const EncodeArgs& a) {
  auto lg = load_graph(a.graph);
  auto op = make_operator(lg.graph, a.op, lg.warnings);
  const WaveConfig wc = a.T > 0.0 ? WaveConfig::from_stop_time(a.T, a.N) : WaveConfig{a.N, a.h};
  wc.validate();
  Json j;
  j["operator"] = to_string(op.variant);
  j["num_steps"] = wc.num_steps;
  j["step_size"] = wc.step_size;
  j["stop_time"] = wc.stop_time();
  const auto stab = check_stability(op, wc);
  j["stability"] = {{"product", stab.product}, {"stable", stab.stable}};
  if (!stab.stable) lg.warnings.push_back("StabilityWarning: h*sqrt(max_eigenvalue_bound) >= 2");
  if (!a.vertices.empty()) {
    const auto seq = propagate_streaming(op, lg.graph.features(), wc, a.vertices, a.velocity);
    Json per = Json::object();
    for (std::size_t b = 0; b < a.vertices.size(); ++b) {
      Json rows = Json::array();
      for (const auto& s : seq.steps) {
        const Eigen::VectorXd c = s.col(static_cast<Eigen::Index>(b));
        rows.push_back(std::vector<double>(c.data(), c.data() + c.size()));
      }
      per[std::to_string(a.vertices[b])] = rows;
    }
    j["sequences"] = per;
  } else {
    const double cells = static_cast<double>(lg.graph.num_nodes()) * (wc.num_steps + 1) * lg.graph.feature_dim();
    if (cells > 5e6) throw Error(ErrorCode::InvalidArgument, "full signal too large to dump; pass --vertex");
    const auto sig = propagate(op, lg.graph.features(), wc);
    Json pos = Json::array();
    for (const auto& p : sig.positions) pos.push_back(matrix_json(p));
    j["positions"] = pos;
    if (a.velocity) {
      Json vel = Json::array();
      for (const auto& v : sig.velocities) vel.push_back(matrix_json(v));
      j["velocities"] = vel;
    }
  }
  j["warnings"] = lg.warnings;
  ctx.write_json("encode.json", j);
  ctx.out << "wrote " << ctx.path("encode.json").string() << '\n';
  return kExitOk;
}

// ---- train / eval ----------------------------------------------------------

struct TrainArgs {
  std::string config, graph;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string seeds;
};

TrainConfig resolve_config(const TrainArgs& a) {
  TrainConfig cfg = load_config(a.config, a.overrides);
  if (!a.graph.empty()) cfg.bundle = a.graph;
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

int do_train(const Context& ctx, const TrainArgs& a) {
  TrainConfig cfg = resolve_config(a);
  auto lg = load_graph(cfg.bundle, cfg.split_seed);
  for (const auto& w : lg.warnings) ctx.note("warning: " + w);
  const auto seeds = a.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed}
                                     : parse_list<std::uint64_t>(a.seeds, "seed");
  std::vector<double> metrics;
  Json timing = Json::object();
  for (auto seed : seeds) {
    cfg.seed = seed;
    auto res = train(lg.graph, cfg, lg.provenance);
    res.report.warnings.insert(res.report.warnings.begin(), lg.warnings.begin(), lg.warnings.end());
    const std::string suffix = seeds.size() > 1 ? "_seed" + std::to_string(seed) : "";
    Json rep = res.report.to_json();
    rep["config"] = cfg.to_json();
    ctx.write_json("train_report" + suffix + ".json", rep);
    save_checkpoint(res.model, ctx.path("checkpoint" + suffix + ".json").string());
    timing["seed" + std::to_string(seed)] = res.report.wall_clock_seconds;
    metrics.push_back(res.report.test_metric);
    ctx.out << "seed " << seed << ": test_" << res.report.metric_name << "=" << std::setprecision(4) << std::fixed
            << res.report.test_metric << " best_epoch=" << res.report.best_epoch << '\n';
    ctx.out.unsetf(std::ios::floatfield);
  }
  if (seeds.size() > 1) {
    double mean = 0.0, ss = 0.0;
    for (double m : metrics) mean += m / static_cast<double>(metrics.size());
    for (double m : metrics) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / static_cast<double>(metrics.size() - 1));
    ctx.write_json("train_summary.json", {{"seeds", seeds}, {"test_metrics", metrics}, {"mean", mean}, {"std", sd},
                                          {"config_hash", cfg.hash()}, {"split_provenance", lg.provenance}});
    ctx.out << "mean=" << mean << " std=" << sd << '\n';
  }
  ctx.write_json("timing.json", timing);
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, graph, split = "test";
  std::uint64_t split_seed = 0;
};

int do_eval(const Context& ctx, const EvalArgs& a) {
  const Model model = load_checkpoint(a.checkpoint);
  auto lg = load_graph(a.graph, a.split_seed);
  const auto op = build_operator(lg.graph, model.variant);
  const auto& m = lg.graph.masks();
  const std::vector<bool>* mask = a.split == "train" ? &m.train : a.split == "val" ? &m.val : a.split == "test" ? &m.test : nullptr;
  if (mask == nullptr) throw Error(ErrorCode::InvalidArgument, "--split must be train, val or test");
  const Metric metric = lg.graph.is_regression() ? Metric::mae : Metric::accuracy;
  const double value = evaluate(model, lg.graph, op, *mask, metric);
  const std::string name = metric == Metric::mae ? "mae" : "accuracy";
  ctx.write_json("eval.json", {{"split", a.split}, {"metric", name}, {"value", value}, {"split_provenance", lg.provenance}});
  ctx.out << a.split << "_" << name << "=" << value << '\n';
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  TrainArgs train;
  std::string steps = "8,25,50,100,200";
  std::string seeds = "0,1,2";
};

int do_sweep(const Context& ctx, const SweepArgs& a) {
  const TrainConfig cfg = resolve_config(a.train);
  auto lg = load_graph(cfg.bundle, cfg.split_seed);
  const auto steps = parse_list<int>(a.steps, "N");
  const auto seeds = parse_list<std::uint64_t>(a.seeds, "seed");
  const auto res = sweep_steps(lg.graph, cfg, steps, seeds, lg.provenance);
  Json j = res.to_json();
  std::vector<double> xs, mus;
  for (const auto& e : res.entries) {
    xs.push_back(e.num_steps);
    mus.push_back(e.mean_oversmoothing);
  }
  if (xs.size() >= 2 && std::all_of(mus.begin(), mus.end(), [](double m) { return m > 0.0; })) {
    const auto fit = fit_exponential_decay(xs, mus);
    j["oversmoothing_fit"] = {{"rate", fit.rate}, {"log_scale", fit.log_scale}, {"r_squared", fit.r_squared}};
  }
  j["config_hash"] = cfg.hash();
  j["split_provenance"] = lg.provenance;
  ctx.write_json("sweep.json", j);
  ctx.write_text("sweep.csv", res.to_csv());
  ctx.write_text("sweep.dat", res.to_gnuplot());
  for (const auto& e : res.entries) {
    ctx.out << "N=" << e.num_steps << " mean=" << e.mean_metric << " std=" << e.std_metric
            << " mu=" << e.mean_oversmoothing << '\n';
  }
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string graph, op = "combinatorial", checkpoint;
  double h = 0.01;
  int N = 1000;
  std::optional<int> v, u;
  double delta = 1e-4;
};

int do_analyze(const Context& ctx, const AnalyzeArgs& a) {
  auto lg = load_graph(a.graph);
  auto op = make_operator(lg.graph, a.op, lg.warnings);
  const NodeMatrix& x = lg.graph.features();
  const WaveConfig wc{a.N, a.h};
  const auto sig = propagate(op, x, wc);
  const auto et = energy_trace(sig, op);
  Json j;
  j["operator"] = to_string(op.variant);
  j["dirichlet_energy"] = dirichlet_energy(op, x);
  j["oversmoothing_metric"] = oversmoothing_metric(op, x);
  j["oversmoothing_metric_final"] = oversmoothing_metric(op, sig.positions.back());
  j["energy"] = {{"num_steps", a.N},
                 {"step_size", a.h},
                 {"initial", et.energies.front()},
                 {"final", et.energies.back()},
                 {"max_relative_drift", et.max_relative_drift},
                 {"flagged", et.flagged},
                 {"stability_product", sig.stability.product}};
  if (!a.checkpoint.empty()) {
    if (!a.v || !a.u) throw Error(ErrorCode::InvalidArgument, "sensitivity needs --v and --u");
    const Model model = load_checkpoint(a.checkpoint);
    const auto mop = build_operator(lg.graph, model.variant);
    j["sensitivity"] = {{"v", *a.v},
                        {"u", *a.u},
                        {"finite_difference", sensitivity(model, mop, x, *a.v, *a.u, a.delta)},
                        {"analytic", sensitivity_analytic(model, mop, x, *a.v, *a.u)}};
  }
  j["warnings"] = lg.warnings;
  ctx.write_json("analyze.json", j);
  ctx.out << "energy drift=" << et.max_relative_drift << (et.flagged ? " (flagged)" : "") << '\n';
  return kExitOk;
}

// ---- oracle-check ----------------------------------------------------------

struct OracleArgs {
  std::string graph, op = "combinatorial";
  double h = 0.01, T = 4.0;
  int levels = 3;
};

int do_oracle_check(const Context& ctx, const OracleArgs& a) {
  auto lg = load_graph(a.graph);
  auto op = make_operator(lg.graph, a.op, lg.warnings);
  const auto rep = convergence_study(op, lg.graph.features(), a.h, a.T, a.levels);
  Json levels = Json::array();
  for (const auto& l : rep.levels) {
    levels.push_back({{"step_size", l.step_size}, {"num_steps", l.num_steps}, {"max_deviation", l.max_deviation}});
  }
  const double max_dev = rep.levels.front().max_deviation;
  ctx.write_json("oracle_check.json", {{"operator", to_string(op.variant)},
                                       {"stop_time", a.T},
                                       {"levels", levels},
                                       {"max_deviation", max_dev},
                                       {"convergence_order", rep.order},
                                       {"finite", rep.finite},
                                       {"warnings", lg.warnings}});
  ctx.out << "max_deviation=" << max_dev << " order=" << rep.order << '\n';
  return kExitOk;
}

// ---- export-wav ------------------------------------------------------------

struct WavArgs {
  std::string graph, op = "combinatorial", output = "signal.wav";
  std::optional<int> vertex;
  bool mix = false;
  WavOptions opts;
};

int do_export_wav(const Context& ctx, const WavArgs& a) {
  if (a.mix == a.vertex.has_value()) throw Error(ErrorCode::InvalidArgument, "pass exactly one of --vertex or --mix");
  auto lg = load_graph(a.graph);
  auto op = make_operator(lg.graph, a.op, lg.warnings);
  const auto audio = synthesize_audio(op, lg.graph.features(), a.vertex, a.opts);
  for (const auto& n : audio.notices) ctx.err << "notice: " << n << '\n';
  const fs::path out = fs::path(a.output).has_parent_path() ? fs::path(a.output) : ctx.path(a.output);
  write_wav(out.string(), audio.samples, audio.sample_rate);
  ctx.out << "wrote " << out.string() << " (" << audio.samples.size() << " samples, route=" << audio.route
          << ", time_scale=" << audio.time_scale << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GLAudio: wave-equation graph encoder with recurrent decoders", "glaudio"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx{out, err};
  app.add_option("-o,--out", ctx.out_dir, "Output directory");
  app.add_flag("-v,--verbose", ctx.verbosity, "Print warnings and progress");

  ConvertArgs ca;
  auto* convert = app.add_subcommand("convert", "Convert raw data or generate a synthetic bundle");
  convert->add_option("--content", ca.content, "Cora-style .content file");
  convert->add_option("--cites", ca.cites, "Cora-style .cites file");
  convert->add_option("--webkb-features", ca.webkb_features, "geom-gcn out1_node_feature_label.txt");
  convert->add_option("--webkb-edges", ca.webkb_edges, "geom-gcn out1_graph_edges.txt");
  convert->add_option("--synth", ca.synth, "Synthetic generator: sbm or distance");
  convert->add_option("--n", ca.n, "SBM vertex count");
  convert->add_option("--classes", ca.classes, "SBM class count");
  convert->add_option("--p-in", ca.p_in, "SBM within-class edge probability");
  convert->add_option("--p-out", ca.p_out, "SBM cross-class edge probability");
  convert->add_option("--noise", ca.noise, "SBM feature noise");
  convert->add_option("--k", ca.k, "Distance-task chain length");
  convert->add_option("--chains", ca.chains, "Distance-task chain count");
  convert->add_option("--seed", ca.seed, "Generator seed");
  convert->add_option("--split-seed", ca.split_seed, "Attach seeded 60/20/20 splits");
  convert->add_option("--output", ca.output, "Bundle path")->required();

  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "Run the wave encoder on a bundle");
  encode->add_option("--graph", ea.graph, "Graph bundle")->required();
  encode->add_option("--operator", ea.op, "combinatorial|normalized|combinatorial-selfloop|normalized-selfloop");
  encode->add_option("--h", ea.h, "Step size");
  encode->add_option("--N", ea.N, "Number of steps");
  encode->add_option("--T", ea.T, "Stop time (sets h = T / N)");
  encode->add_option("--vertex", ea.vertices, "Only emit these vertices' sequences");
  encode->add_flag("--velocity", ea.velocity, "Include velocities");

  TrainArgs ta;
  auto* trainc = app.add_subcommand("train", "Train a model");
  trainc->add_option("--config", ta.config, "JSON config");
  trainc->add_option("--graph", ta.graph, "Graph bundle (overrides dataset.bundle)");
  trainc->add_option("--set", ta.overrides, "Override section.key=value");
  trainc->add_option("--seed", ta.seed, "Seed");
  trainc->add_option("--seeds", ta.seeds, "Comma-separated seeds (one run each)");

  EvalArgs va;
  auto* evalc = app.add_subcommand("eval", "Evaluate a checkpoint");
  evalc->add_option("--checkpoint", va.checkpoint, "Checkpoint JSON")->required();
  evalc->add_option("--graph", va.graph, "Graph bundle")->required();
  evalc->add_option("--split", va.split, "train|val|test");
  evalc->add_option("--split-seed", va.split_seed, "Seed for splits when the bundle has none");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Accuracy versus N at fixed stop time");
  sweep->add_option("--config", sa.train.config, "JSON config");
  sweep->add_option("--graph", sa.train.graph, "Graph bundle (overrides dataset.bundle)");
  sweep->add_option("--set", sa.train.overrides, "Override section.key=value");
  sweep->add_option("--N", sa.steps, "Comma-separated step counts");
  sweep->add_option("--seeds", sa.seeds, "Comma-separated seeds");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Energy, over-smoothing and sensitivity probes");
  analyze->add_option("--graph", aa.graph, "Graph bundle")->required();
  analyze->add_option("--operator", aa.op, "Operator variant");
  analyze->add_option("--h", aa.h, "Step size");
  analyze->add_option("--N", aa.N, "Number of steps");
  analyze->add_option("--checkpoint", aa.checkpoint, "Checkpoint for sensitivity");
  analyze->add_option("--v", aa.v, "Output vertex");
  analyze->add_option("--u", aa.u, "Input vertex");
  analyze->add_option("--delta", aa.delta, "Finite-difference step (relative)");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle-check", "Compare the encoder with the exact signal");
  oracle->add_option("--graph", oa.graph, "Graph bundle")->required();
  oracle->add_option("--operator", oa.op, "Operator variant");
  oracle->add_option("--h", oa.h, "Coarsest step size");
  oracle->add_option("--T", oa.T, "Stop time");
  oracle->add_option("--levels", oa.levels, "Number of halvings");

  WavArgs wa;
  auto* wav = app.add_subcommand("export-wav", "Render a vertex signal as audio");
  wav->add_option("--graph", wa.graph, "Graph bundle")->required();
  wav->add_option("--operator", wa.op, "Operator variant");
  wav->add_option("--vertex", wa.vertex, "Vertex to render");
  wav->add_flag("--mix", wa.mix, "Average all vertices");
  wav->add_option("--sample-rate", wa.opts.sample_rate, "Samples per second");
  wav->add_option("--duration", wa.opts.duration, "Seconds");
  wav->add_option("--time-scale", wa.opts.time_scale, "Graph time per second (0 = map sqrt(lambda_max) to 2 kHz)");
  wav->add_option("--output", wa.output, "WAV path");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error [Usage]: " << e.what() << '\n' << app.help();
    return kExitValidation;
  }

  try {
    if (*convert) return do_convert(ctx, ca);
    if (*encode) return do_encode(ctx, ea);
    if (*trainc) return do_train(ctx, ta);
    if (*evalc) return do_eval(ctx, va);
    if (*sweep) return do_sweep(ctx, sa);
    if (*analyze) return do_analyze(ctx, aa);
    if (*oracle) return do_oracle_check(ctx, oa);
    if (*wav) return do_export_wav(ctx, wa);
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    err << "error [" << to_string(e.code()) << "]: " << msg << '\n';
    return is_validation(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error [Runtime]: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitValidation;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace glaudio
