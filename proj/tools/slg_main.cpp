#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slg/bench.hpp"
#include "slg/io.hpp"
#include "slg/partition.hpp"
#include "slg/synth.hpp"

namespace fs = std::filesystem;
using namespace slg;

namespace {

struct Opts {
  std::string input, output;
  int T = 6, g = 30;
  double alpha0 = 0.1;
  int iters = 30000, burnin = 10000, thin = 20;
  std::uint64_t seed = 1;
  int chains = 1;
  int checkpoint_every = 0;
  int kappa = 0;
  std::string scenario = "planted-blocks";
  int replicates = 10;
  int n = 60, S = 1;
  double noise = 0.1;
  std::string blocks = "10,20,30";
  int patterns = 5, communities = 6;
  double cross_floor = 1e-6;
};

std::vector<int> parse_blocks(const std::string& text) {
  std::vector<int> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

void write_plain(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for write");
  out << text;
  if (!out.flush()) fail(Errc::IoError, "write failed on " + path.string());
}

void write_fit_outputs(const fs::path& dir, const Opts& o, int chain,
                       const PosteriorSamples& smp, int n, int S) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& tr : smp.trace)
    rows.push_back({std::to_string(tr.sweep), csv_num(tr.log_joint),
                    csv_num(tr.sigma2_e), std::to_string(tr.occupied_atoms)});
  write_csv(dir / "sigma2e_trace.csv", "sigma2e-trace",
            {"sweep", "log_joint", "sigma2_e", "occupied_atoms"}, rows);

  rows.clear();
  for (const auto& s : smp.samples)
    for (std::size_t g = 0; g < s.graphs.size(); ++g)
      rows.push_back({std::to_string(s.sweep), std::to_string(g + 1),
                      csv_num(s.graphs[g].theta)});
  write_csv(dir / "theta.csv", "theta", {"sweep", "graph", "theta"}, rows);

  rows.clear();
  for (const auto& s : smp.samples)
    for (std::size_t g = 0; g < s.graphs.size(); ++g)
      for (int k = 0; k < s.graphs[g].lambda.size(); ++k)
        rows.push_back({std::to_string(s.sweep), std::to_string(g + 1),
                        std::to_string(k + 1), csv_num(s.graphs[g].lambda(k))});
  write_csv(dir / "lambda.csv", "lambda", {"sweep", "graph", "k", "lambda"},
            rows);

  rows.clear();
  for (const auto& s : smp.samples)
    for (std::size_t g = 0; g < s.graphs.size(); ++g)
      for (int k = 0; k < s.graphs[g].eta.size(); ++k)
        rows.push_back({std::to_string(s.sweep), std::to_string(g + 1),
                        std::to_string(k + 1),
                        std::to_string(s.graphs[g].eta(k))});
  write_csv(dir / "eta.csv", "eta", {"sweep", "graph", "k", "eta"}, rows);

  rows.clear();
  for (const auto& s : smp.samples)
    for (std::size_t g = 0; g < s.graphs.size(); ++g)
      rows.push_back({std::to_string(s.sweep), std::to_string(g + 1),
                      std::to_string(s.graphs[g].z)});
  write_csv(dir / "assignments.csv", "assignments", {"sweep", "graph", "atom"},
            rows);

  save_samples(dir / "samples.dat", smp);

  std::ostringstream ms;
  ms << "command=fit\ninput=" << o.input << "\nn=" << n << "\nS=" << S
     << "\nT=" << o.T << "\ng=" << o.g << "\nalpha0=" << o.alpha0
     << "\niters=" << o.iters << "\nburnin=" << o.burnin
     << "\nthin=" << o.thin << "\nseed=" << o.seed << "\nchain=" << chain
     << "\n";
  write_plain(dir / "manifest.txt", ms.str());
}

int cmd_fit(const Opts& o) {
  const std::vector<WeightedGraph> graphs = read_graph_dir(o.input);
  std::vector<NormalizedLaplacian> data;
  data.reserve(graphs.size());
  for (const auto& g : graphs) data.push_back(build_laplacian(g));

  HyperParams hp;
  hp.T = o.T;
  hp.g = o.g;
  hp.alpha0 = o.alpha0;
  validate_hyperparams(hp);

  for (int c = 0; c < o.chains; ++c) {
    const fs::path outdir =
        o.chains > 1 ? fs::path(o.output) / ("chain_" + std::to_string(c))
                     : fs::path(o.output);
    fs::create_directories(outdir);
    GibbsConfig cfg;
    cfg.iters = o.iters;
    cfg.burnin = o.burnin;
    cfg.thin = o.thin;
    cfg.seed = o.seed;
    cfg.chain = c;
    cfg.checkpoint_every =
        o.checkpoint_every > 0 ? o.checkpoint_every : o.iters;
    const fs::path ckpath = outdir / "checkpoint.dat";
    const CheckpointSink sink = [&](const Checkpoint& ck) {
      save_checkpoint(ckpath, ck);
    };

    PosteriorSamples samples;
    bool resumed = false;
    if (fs::exists(ckpath)) {
      Checkpoint ck = load_checkpoint(ckpath);
      if (ck.collected.seed == cfg.seed && ck.collected.chain == cfg.chain &&
          ck.collected.burnin == cfg.burnin &&
          ck.collected.thin == cfg.thin && ck.next_sweep <= cfg.iters + 1) {
        std::cerr << "resuming chain " << c << " at sweep " << ck.next_sweep
                  << "\n";
        samples = continue_chain(std::move(ck), data, hp, cfg, sink);
        resumed = true;
      }
    }
    if (!resumed) samples = run_chain(data, hp, cfg, sink);
    write_fit_outputs(outdir, o, c, samples,
                      static_cast<int>(data[0].L.rows()),
                      static_cast<int>(data.size()));
  }
  return 0;
}

int cmd_partition(const Opts& o) {
  const PosteriorSamples samples = load_samples(fs::path(o.input) / "samples.dat");
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "fit produced no posterior samples");

  // Frequency aggregation needs a minimum sample count; replicating the
  // sample list uniformly preserves the frequencies exactly.
  PosteriorSamples work = samples;
  const int M = static_cast<int>(samples.samples.size());
  if (M < 10) {
    const int r = (10 + M - 1) / M;
    work.samples.clear();
    for (int rep = 0; rep < r; ++rep)
      for (const auto& s : samples.samples) work.samples.push_back(s);
  }

  const int S = static_cast<int>(work.samples.front().graphs.size());
  fs::create_directories(o.output);
  std::vector<std::vector<std::string>> label_rows, hist_rows;
  for (int s = 0; s < S; ++s) {
    const LabelUncertainty agg = aggregate_uncertainty(work, s, o.kappa);
    const int n = static_cast<int>(agg.prob.rows());
    std::vector<std::vector<std::string>> urows;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < agg.prob.cols(); ++c)
        if (agg.prob(i, c) > agg.prob(i, best)) best = c;
      label_rows.push_back({std::to_string(s + 1), std::to_string(i + 1),
                            std::to_string(best + 1)});
      std::vector<std::string> row = {std::to_string(i + 1),
                                      std::to_string(best + 1)};
      for (int c = 0; c < agg.prob.cols(); ++c)
        row.push_back(csv_num(agg.prob(i, c)));
      urows.push_back(std::move(row));
    }
    std::vector<std::string> uheader = {"vertex", "label"};
    for (int c = 0; c < agg.prob.cols(); ++c)
      uheader.push_back("p_" + std::to_string(c + 1));
    write_csv(fs::path(o.output) / ("uncertainty_g" + std::to_string(s + 1) +
                                    ".csv"),
              "uncertainty", uheader, urows);
    for (const auto& [kap, freq] : agg.kappa_histogram)
      hist_rows.push_back({std::to_string(s + 1), std::to_string(kap),
                           csv_num(freq)});
  }
  write_csv(fs::path(o.output) / "labels.csv", "labels",
            {"graph", "vertex", "label"}, label_rows);
  write_csv(fs::path(o.output) / "kappa_hist.csv", "kappa-hist",
            {"graph", "kappa", "frequency"}, hist_rows);
  return 0;
}

int cmd_synth(const Opts& o) {
  SynthSpec spec;
  spec.scenario = o.scenario;
  spec.n = o.n;
  spec.S = o.S;
  spec.T = o.T;
  spec.noise = o.noise;
  spec.block_sizes = parse_blocks(o.blocks);
  spec.pattern_count = o.patterns;
  spec.communities = o.communities;
  spec.seed = o.seed;
  spec.cross_floor = o.cross_floor;
  Rng rng = Rng::stream(spec.seed, 0, 0);
  write_dataset(o.output, generate(spec, rng));
  return 0;
}

int cmd_bench(const Opts& o) {
  std::vector<BenchRow> rows;
  if (o.scenario == "table1")
    rows = bench_table1(o.replicates, o.iters, o.seed);
  else if (o.scenario == "table2")
    rows = bench_table2(o.replicates, o.iters, o.seed);
  else if (o.scenario == "table3")
    rows = bench_table3(o.iters, o.seed);
  else if (o.scenario == "overspec")
    rows = bench_overspec(o.iters, o.seed);
  else
    rows = bench_lifting(o.iters, o.seed);
  fs::create_directories(o.output);
  write_bench_csv(fs::path(o.output) / "results.csv", rows);
  return 0;
}

int cmd_diagnose(const Opts& o) {
  const fs::path in = o.input;
  const PosteriorSamples samples = load_samples(in / "samples.dat");
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "fit produced no posterior samples");

  std::ifstream mf(in / "manifest.txt");
  if (!mf) fail(Errc::MissingFitArtifacts, "no manifest.txt next to samples.dat");
  std::string line, input_dir;
  while (std::getline(mf, line))
    if (line.rfind("input=", 0) == 0) input_dir = line.substr(6);
  if (input_dir.empty())
    fail(Errc::MissingFitArtifacts, "fit manifest lacks the input path");

  const std::vector<WeightedGraph> graphs = read_graph_dir(input_dir);
  std::vector<NormalizedLaplacian> data;
  for (const auto& g : graphs) data.push_back(build_laplacian(g));
  const int S = static_cast<int>(data.size());
  if (S != static_cast<int>(samples.samples.front().graphs.size()))
    fail(Errc::DimensionMismatch, "graph count changed since the fit");
  const int n = static_cast<int>(data[0].L.rows());
  const int T = static_cast<int>(samples.samples.front().graphs[0].lambda.size());

  std::vector<std::vector<std::string>> spec_rows, ll_rows;
  for (int s = 0; s < S; ++s) {
    const Vector omega = full_eigendecomposition(data[s].L).omega;
    const Vector lam = posterior_mean_lambda(samples, s);
    const double theta = posterior_mean_theta(samples, s);
    for (int k = 0; k < n; ++k)
      spec_rows.push_back({std::to_string(s + 1), std::to_string(k + 1),
                           csv_num(omega(k)),
                           csv_num(k < T ? lam(k) : theta)});

    std::map<int, std::pair<double, int>> per_atom;
    for (const auto& smp : samples.samples)
      for (std::size_t a = 0; a < smp.atom_ids.size(); ++a) {
        const double ll =
            marginal_loglik_Q(smp.atom_U[a], data[s].L, smp.sigma2_e);
        auto& acc = per_atom[smp.atom_ids[a]];
        acc.first += ll;
        acc.second += 1;
      }
    for (const auto& [atom, acc] : per_atom)
      ll_rows.push_back({std::to_string(s + 1), std::to_string(atom),
                         csv_num(acc.first / acc.second)});
  }
  fs::create_directories(o.output);
  write_csv(fs::path(o.output) / "spectrum.csv", "spectrum",
            {"graph", "k", "raw_lambda", "fitted_value"}, spec_rows);
  write_csv(fs::path(o.output) / "atom_loglik.csv", "atom-loglik",
            {"graph", "atom", "mean_marginal_loglik"}, ll_rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("SLG_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"Bayesian spiked-Laplacian modeling of weighted graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");
  Opts o;

  auto* fit = app.add_subcommand("fit", "sample the posterior for a graph directory");
  fit->add_option("--input", o.input, "directory of graph CSV files")->required();
  fit->add_option("--output", o.output, "output directory")->required();
  fit->add_option("--T", o.T, "spike count");
  fit->add_option("--g", o.g, "dictionary truncation");
  fit->add_option("--alpha0", o.alpha0, "concentration parameter");
  fit->add_option("--iters", o.iters, "total sweeps");
  fit->add_option("--burnin", o.burnin, "discarded sweeps");
  fit->add_option("--thin", o.thin, "thinning interval");
  fit->add_option("--seed", o.seed, "random seed");
  fit->add_option("--chains", o.chains, "independent chains")
      ->check(CLI::PositiveNumber);
  fit->add_option("--checkpoint-every", o.checkpoint_every,
                  "sweeps between checkpoints (0: final only)");

  auto* part = app.add_subcommand("partition", "posterior community labels");
  part->add_option("--input", o.input, "fit output directory")->required();
  part->add_option("--output", o.output, "output directory")->required();
  part->add_option("--kappa", o.kappa,
                   "force a block count (0: per-sample spike count)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--scenario", o.scenario, "generator name")
      ->capture_default_str()
      ->check(CLI::IsMember({"planted-blocks", "latent-manifold",
                             "hetero-population", "prior-draw"}));
  synth->add_option("--output", o.output, "output directory")->required();
  synth->add_option("--n", o.n, "vertices");
  synth->add_option("--S", o.S, "graphs");
  synth->add_option("--T", o.T, "spike count (prior-draw)");
  synth->add_option("--noise", o.noise, "scenario noise scale");
  synth->add_option("--blocks", o.blocks, "comma-separated block sizes");
  synth->add_option("--patterns", o.patterns, "membership patterns");
  synth->add_option("--communities", o.communities, "community count");
  synth->add_option("--seed", o.seed, "random seed");
  synth->add_option("--cross-floor", o.cross_floor,
                    "cross-block weight floor (planted-blocks)");

  auto* bench = app.add_subcommand("bench", "benchmark tables");
  bench->add_option("--scenario", o.scenario, "bench name")
      ->required()
      ->check(CLI::IsMember(
          {"table1", "table2", "table3", "overspec", "lifting"}));
  bench->add_option("--output", o.output, "output directory")->required();
  bench->add_option("--replicates", o.replicates, "replicates per setting");
  auto* bench_iters = bench->add_option("--iters", o.iters, "sweeps per fit");
  bench->add_option("--seed", o.seed, "random seed");

  auto* diag = app.add_subcommand("diagnose", "spectrum and atom diagnostics");
  diag->add_option("--input", o.input, "fit output directory")->required();
  diag->add_option("--output", o.output, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (bench->parsed() && bench_iters->count() == 0) o.iters = 3000;

  try {
    if (fit->parsed()) return cmd_fit(o);
    if (part->parsed()) return cmd_partition(o);
    if (synth->parsed()) return cmd_synth(o);
    if (bench->parsed()) return cmd_bench(o);
    if (diag->parsed()) return cmd_diagnose(o);
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
