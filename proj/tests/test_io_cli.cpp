#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#include <unistd.h>
#endif

#include "doctest.h"
#include "slg/io.hpp"
#include "test_util.hpp"

using namespace slg;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  static const fs::path root =
      fs::temp_directory_path() /
      ("slg_io_cli_" + std::to_string(static_cast<long>(::getpid())));
  const fs::path dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
}

// Rows of a CSV written by this project, comments skipped, header included.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream is(slurp(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + SLG_CLI_PATH + "\" " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
#ifndef _WIN32
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NoGraphsFound;  // sentinel meaning "did not throw"
}

}  // namespace

TEST_SUITE("io_cli") {

TEST_CASE("csv_num picks the shortest exact decimal") {
  CHECK(csv_num(0.5) == "0.5");
  CHECK(csv_num(-2.5) == "-2.5");
  CHECK(csv_num(3.0) == "3");
  CHECK(csv_num(0.1) == "0.1");
  for (double x : {1.0 / 3.0, 2.0 / 7.0, 1e-300, 6.02214076e23, -0.0,
                   0.30000000000000004}) {
    CHECK(std::strtod(csv_num(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("dense graph files round-trip bit-exactly") {
  const fs::path dir = fresh_dir("dense_rt");
  Rng rng(11);
  const WeightedGraph g = random_connected_graph(7, 0.5, rng);
  write_graph_csv(dir / "g.csv", g);
  const WeightedGraph back = read_graph_csv(dir / "g.csv");
  REQUIRE(back.n == g.n);
  CHECK((back.A - g.A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("triplet graph files are symmetrized from 1-based indices") {
  const fs::path dir = fresh_dir("triplet");
  spit(dir / "t.csv",
       "# upper triangle, 1-based\n"
       "1 2 0.5\n"
       "2 3 1.25\n"
       "1 3 2\n");
  const WeightedGraph g = read_graph_csv(dir / "t.csv");
  REQUIRE(g.n == 3);
  CHECK(g.A(0, 1) == 0.5);
  CHECK(g.A(1, 0) == 0.5);
  CHECK(g.A(1, 2) == 1.25);
  CHECK(g.A(0, 2) == 2.0);
  CHECK(g.A(0, 0) == 0.0);
}

TEST_CASE("graph file parse and validation errors") {
  const fs::path dir = fresh_dir("graph_errors");
  spit(dir / "zero_index.csv", "0 2 0.5\n");
  CHECK(code_of([&] { read_graph_csv(dir / "zero_index.csv"); }) ==
        Errc::ParseError);
  spit(dir / "short_row.csv", "2\n0,1\n1\n");
  CHECK(code_of([&] { read_graph_csv(dir / "short_row.csv"); }) ==
        Errc::ParseError);
  spit(dir / "row_count.csv", "3\n0,1,0\n1,0,1\n");
  CHECK(code_of([&] { read_graph_csv(dir / "row_count.csv"); }) ==
        Errc::ParseError);
  spit(dir / "two_tokens.csv", "1 2\n");
  CHECK(code_of([&] { read_graph_csv(dir / "two_tokens.csv"); }) ==
        Errc::ParseError);
  spit(dir / "empty.csv", "# nothing here\n");
  CHECK(code_of([&] { read_graph_csv(dir / "empty.csv"); }) ==
        Errc::ParseError);
  spit(dir / "bad_weight.csv", "1 2 fast\n");
  CHECK(code_of([&] { read_graph_csv(dir / "bad_weight.csv"); }) ==
        Errc::ParseError);
  CHECK(code_of([&] { read_graph_csv(dir / "missing.csv"); }) == Errc::IoError);
  spit(dir / "asym.csv", "2\n0,1\n0.5,0\n");
  CHECK(code_of([&] { read_graph_csv(dir / "asym.csv"); }) ==
        Errc::AsymmetricInput);
  spit(dir / "disconnected.csv", "1 2 1\n3 4 1\n");
  CHECK(code_of([&] { read_graph_csv(dir / "disconnected.csv"); }) ==
        Errc::DisconnectedGraph);
}

TEST_CASE("read_graph_dir walks csv files in name order") {
  const fs::path dir = fresh_dir("graph_dir");
  CHECK(code_of([&] { read_graph_dir(dir); }) == Errc::NoGraphsFound);
  CHECK(code_of([&] { read_graph_dir(dir / "nope"); }) == Errc::IoError);

  Rng rng(12);
  write_graph_csv(dir / "b.csv", random_connected_graph(3, 0.9, rng));
  write_graph_csv(dir / "a.csv", random_connected_graph(4, 0.9, rng));
  spit(dir / "notes.txt", "ignored\n");
  const std::vector<WeightedGraph> graphs = read_graph_dir(dir);
  REQUIRE(graphs.size() == 2);
  CHECK(graphs[0].n == 4);  // a.csv first
  CHECK(graphs[1].n == 3);
}

TEST_CASE("posterior sample artifacts reload bit-exactly") {
  const fs::path dir = fresh_dir("samples_rt");
  Rng rng(13);
  std::vector<NormalizedLaplacian> data;
  for (int s = 0; s < 2; ++s)
    data.push_back(build_laplacian(random_connected_graph(6, 0.6, rng)));
  HyperParams hp;
  hp.T = 2;
  hp.g = 3;
  GibbsConfig cfg;
  cfg.iters = 30;
  cfg.burnin = 10;
  cfg.thin = 4;
  cfg.seed = 1234;

  std::vector<Checkpoint> cks;
  cfg.checkpoint_every = 12;
  const PosteriorSamples ps =
      run_chain(data, hp, cfg, [&](const Checkpoint& ck) { cks.push_back(ck); });
  REQUIRE(!ps.samples.empty());
  REQUIRE(!cks.empty());

  save_samples(dir / "s.dat", ps);
  const PosteriorSamples back = load_samples(dir / "s.dat");
  CHECK(back.iters == ps.iters);
  CHECK(back.seed == ps.seed);
  REQUIRE(back.trace.size() == ps.trace.size());
  for (std::size_t i = 0; i < ps.trace.size(); ++i) {
    CHECK(back.trace[i].log_joint == ps.trace[i].log_joint);
    CHECK(back.trace[i].occupied_atoms == ps.trace[i].occupied_atoms);
  }
  REQUIRE(back.samples.size() == ps.samples.size());
  for (std::size_t i = 0; i < ps.samples.size(); ++i) {
    const auto& a = ps.samples[i];
    const auto& b = back.samples[i];
    CHECK(a.log_joint == b.log_joint);
    CHECK(a.sigma2_e == b.sigma2_e);
    CHECK(a.w == b.w);
    CHECK((a.pi - b.pi).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.graphs.size() == b.graphs.size());
    for (std::size_t s = 0; s < a.graphs.size(); ++s) {
      CHECK(a.graphs[s].z == b.graphs[s].z);
      CHECK(a.graphs[s].theta == b.graphs[s].theta);
      CHECK((a.graphs[s].lambda - b.graphs[s].lambda).cwiseAbs().maxCoeff() ==
            0.0);
      CHECK((a.graphs[s].diagL - b.graphs[s].diagL).cwiseAbs().maxCoeff() ==
            0.0);
    }
    REQUIRE(a.atom_ids == b.atom_ids);
    for (std::size_t t = 0; t < a.atom_U.size(); ++t)
      CHECK((a.atom_U[t] - b.atom_U[t]).cwiseAbs().maxCoeff() == 0.0);
  }

  save_checkpoint(dir / "c.dat", cks.front());
  const Checkpoint ck = load_checkpoint(dir / "c.dat");
  CHECK(ck.next_sweep == cks.front().next_sweep);
  CHECK(ck.state.sigma2_e == cks.front().state.sigma2_e);
  CHECK(ck.state.dict.atoms.size() == cks.front().state.dict.atoms.size());
  for (std::size_t a = 0; a < ck.state.dict.atoms.size(); ++a)
    CHECK((ck.state.dict.atoms[a].U - cks.front().state.dict.atoms[a].U)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  CHECK(ck.collected.samples.size() == cks.front().collected.samples.size());
}

TEST_CASE("artifact corruption and absence are distinct failures") {
  const fs::path dir = fresh_dir("corrupt");
  Rng rng(14);
  std::vector<NormalizedLaplacian> data{
      build_laplacian(random_connected_graph(5, 0.8, rng))};
  HyperParams hp;
  hp.T = 2;
  hp.g = 2;
  GibbsConfig cfg;
  cfg.iters = 12;
  cfg.burnin = 4;
  cfg.thin = 2;
  const PosteriorSamples ps = run_chain(data, hp, cfg);
  save_samples(dir / "s.dat", ps);

  std::string text = slurp(dir / "s.dat");
  std::size_t pos = text.size() / 2;
  while (text[pos] == '\n') ++pos;
  text[pos] = text[pos] == '7' ? '8' : '7';
  spit(dir / "s.dat", text);
  CHECK(code_of([&] { load_samples(dir / "s.dat"); }) == Errc::ChecksumMismatch);

  spit(dir / "no_trailer.dat", "slg-samples v1\nconfig 1 0 1 0 0\n");
  CHECK(code_of([&] { load_samples(dir / "no_trailer.dat"); }) ==
        Errc::ChecksumMismatch);
  CHECK(code_of([&] { load_samples(dir / "absent.dat"); }) ==
        Errc::MissingFitArtifacts);
}

TEST_CASE("write_csv emits the versioned table header") {
  const fs::path dir = fresh_dir("csv_header");
  write_csv(dir / "t.csv", "mytable", {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  const std::string text = slurp(dir / "t.csv");
  CHECK(text.rfind("# slg-csv v1 mytable\na,b\n1,2\n3,4\n", 0) == 0);
}

TEST_CASE("bench rows: sd cell is blank for single replicates") {
  const fs::path dir = fresh_dir("bench_csv");
  std::vector<BenchRow> rows;
  rows.push_back({"spiked", "nmi", 0.9, 0.05, 10});
  rows.push_back({"raw", "theta", 1.25, std::nan(""), 1});
  write_bench_csv(dir / "results.csv", rows);
  const auto parsed = csv_rows(dir / "results.csv");
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0] ==
        std::vector<std::string>{"method", "metric", "mean", "sd", "replicates"});
  CHECK(parsed[1] == std::vector<std::string>{"spiked", "nmi", "0.9", "0.05", "10"});
  CHECK(parsed[2] == std::vector<std::string>{"raw", "theta", "1.25", "", "1"});
}

TEST_CASE("cli: help and usage errors") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("fit --help") == 0);
  CHECK(run_cli("") == 2);                 // a subcommand is required
  CHECK(run_cli("frobnicate") == 2);       // unknown subcommand
  CHECK(run_cli("fit --output x") == 2);   // missing required --input
  CHECK(run_cli("synth --scenario nope --output x") == 2);
}

TEST_CASE("cli: synth, fit, partition, diagnose pipeline") {
  const fs::path base = fresh_dir("pipeline");
  const fs::path synth = base / "data";
  const fs::path fit = base / "fit";
  const fs::path part = base / "part";
  const fs::path diag = base / "diag";

  CHECK(run_cli("synth --scenario planted-blocks --n 14 --S 2 --noise 0.05"
                " --blocks 7,7 --seed 3 --output " +
                synth.string()) == 0);
  CHECK(fs::exists(synth / "graph_000.csv"));
  CHECK(fs::exists(synth / "graph_001.csv"));
  CHECK(fs::exists(synth / "truth_labels.txt"));
  const SynthSpec spec = parse_manifest(slurp(synth / "manifest.txt"));
  CHECK(spec.n == 14);
  CHECK(spec.S == 2);
  CHECK(spec.seed == 3);

  const std::string fit_args =
      " --T 3 --g 4 --alpha0 0.5 --iters 60 --burnin 20 --thin 10 --seed 5";
  CHECK(run_cli("fit --input " + synth.string() + " --output " + fit.string() +
                fit_args) == 0);
  for (const char* f :
       {"sigma2e_trace.csv", "theta.csv", "lambda.csv", "eta.csv",
        "assignments.csv", "samples.dat", "manifest.txt", "checkpoint.dat"})
    CHECK(fs::exists(fit / f));
  const PosteriorSamples ps = load_samples(fit / "samples.dat");
  CHECK(ps.samples.size() == 4);  // sweeps 30, 40, 50, 60

  CHECK(run_cli("partition --input " + fit.string() + " --output " +
                part.string()) == 0);
  CHECK(fs::exists(part / "labels.csv"));
  CHECK(fs::exists(part / "kappa_hist.csv"));
  for (int s = 1; s <= 2; ++s) {
    const auto rows =
        csv_rows(part / ("uncertainty_g" + std::to_string(s) + ".csv"));
    REQUIRE(rows.size() == 15);  // header + one row per vertex
    for (std::size_t r = 1; r < rows.size(); ++r) {
      double total = 0.0;
      for (std::size_t c = 2; c < rows[r].size(); ++c)
        total += std::strtod(rows[r][c].c_str(), nullptr);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  const auto hist = csv_rows(part / "kappa_hist.csv");
  double h1 = 0.0, h2 = 0.0;
  for (std::size_t r = 1; r < hist.size(); ++r)
    (hist[r][0] == "1" ? h1 : h2) +=
        std::strtod(hist[r][2].c_str(), nullptr);
  CHECK(h1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h2 == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(run_cli("diagnose --input " + fit.string() + " --output " +
                diag.string()) == 0);
  const auto spectrum = csv_rows(diag / "spectrum.csv");
  CHECK(spectrum.size() == 1 + 2 * 14);  // header + S * n rows
  const auto atoll = csv_rows(diag / "atom_loglik.csv");
  CHECK(atoll.size() >= 2);

  SUBCASE("diagnose fails cleanly when the manifest loses its input") {
    const fs::path broken = base / "broken_fit";
    fs::create_directories(broken);
    fs::copy_file(fit / "samples.dat", broken / "samples.dat");
    spit(broken / "manifest.txt", "command=fit\nn=14\n");
    CHECK(run_cli("diagnose --input " + broken.string() + " --output " +
                  (base / "d2").string()) == 5);
    fs::remove(broken / "manifest.txt");
    CHECK(run_cli("diagnose --input " + broken.string() + " --output " +
                  (base / "d3").string()) == 5);
  }

  SUBCASE("partition without artifacts exits with the artifact code") {
    CHECK(run_cli("partition --input " + (base / "empty").string() +
                  " --output " + (base / "p2").string()) == 5);
  }

  SUBCASE("fit on a directory with no graphs exits with the usage code") {
    fs::create_directories(base / "nodata");
    CHECK(run_cli("fit --input " + (base / "nodata").string() + " --output " +
                  (base / "f2").string() + fit_args) == 2);
  }
}

TEST_CASE("cli: identical fits are byte-identical") {
  const fs::path base = fresh_dir("determinism");
  const fs::path synth = base / "data";
  REQUIRE(run_cli("synth --n 12 --S 1 --noise 0.08 --blocks 6,6 --seed 21"
                  " --output " +
                  synth.string()) == 0);
  const std::string fit_args = " --T 2 --g 3 --iters 50 --burnin 10 --thin 5"
                               " --seed 77";
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "f1").string() + fit_args) == 0);
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "f2").string() + fit_args) == 0);
  CHECK(slurp(base / "f1" / "samples.dat") == slurp(base / "f2" / "samples.dat"));
  CHECK(slurp(base / "f1" / "sigma2e_trace.csv") ==
        slurp(base / "f2" / "sigma2e_trace.csv"));
}

TEST_CASE("cli: resuming from a checkpoint replays the full run") {
  const fs::path base = fresh_dir("resume");
  const fs::path synth = base / "data";
  REQUIRE(run_cli("synth --n 12 --S 2 --noise 0.08 --blocks 5,7 --seed 31"
                  " --output " +
                  synth.string()) == 0);
  const std::string common = " --T 2 --g 3 --burnin 20 --thin 10 --seed 99";
  // Direct run to 100 sweeps.
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "direct").string() + common + " --iters 100") == 0);
  // Stop at 60, then ask for 100: the second call resumes at sweep 61.
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "resumed").string() + common + " --iters 60") == 0);
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "resumed").string() + common + " --iters 100") == 0);
  CHECK(slurp(base / "direct" / "samples.dat") ==
        slurp(base / "resumed" / "samples.dat"));

  SUBCASE("a corrupted checkpoint is reported, not silently refit") {
    std::string text = slurp(base / "resumed" / "checkpoint.dat");
    std::size_t pos = text.size() / 2;
    while (text[pos] == '\n') ++pos;
    text[pos] = text[pos] == '3' ? '4' : '3';
    spit(base / "resumed" / "checkpoint.dat", text);
    CHECK(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "resumed").string() + common + " --iters 100") == 5);
  }
}

TEST_CASE("cli: single posterior sample yields certainty-one labels") {
  const fs::path base = fresh_dir("one_sample");
  const fs::path synth = base / "data";
  REQUIRE(run_cli("synth --n 10 --S 1 --noise 0.05 --blocks 5,5 --seed 41"
                  " --output " +
                  synth.string()) == 0);
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "fit").string() +
                  " --T 2 --g 2 --iters 50 --burnin 40 --thin 10 --seed 2") ==
          0);
  const PosteriorSamples ps = load_samples(base / "fit" / "samples.dat");
  REQUIRE(ps.samples.size() == 1);
  REQUIRE(run_cli("partition --input " + (base / "fit").string() +
                  " --output " + (base / "part").string()) == 0);
  const auto rows = csv_rows(base / "part" / "uncertainty_g1.csv");
  REQUIRE(rows.size() == 11);
  for (std::size_t r = 1; r < rows.size(); ++r)
    for (std::size_t c = 2; c < rows[r].size(); ++c) {
      const double p = std::strtod(rows[r][c].c_str(), nullptr);
      CHECK((p == 0.0 || p == 1.0));
    }
}

TEST_CASE("cli: multiple chains write per-chain directories") {
  const fs::path base = fresh_dir("chains");
  const fs::path synth = base / "data";
  REQUIRE(run_cli("synth --n 10 --S 1 --noise 0.08 --blocks 5,5 --seed 51"
                  " --output " +
                  synth.string()) == 0);
  REQUIRE(run_cli("fit --input " + synth.string() + " --output " +
                  (base / "fit").string() +
                  " --T 2 --g 2 --iters 30 --burnin 10 --thin 5 --seed 6"
                  " --chains 2") == 0);
  CHECK(fs::exists(base / "fit" / "chain_0" / "samples.dat"));
  CHECK(fs::exists(base / "fit" / "chain_1" / "samples.dat"));
  CHECK(slurp(base / "fit" / "chain_0" / "samples.dat") !=
        slurp(base / "fit" / "chain_1" / "samples.dat"));
}

TEST_CASE("cli: bench writes the results table") {
  const fs::path base = fresh_dir("bench");
  CHECK(run_cli("bench --scenario lifting --iters 120 --seed 4 --output " +
                base.string()) == 0);
  const auto rows = csv_rows(base / "results.csv");
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] ==
        std::vector<std::string>{"method", "metric", "mean", "sd", "replicates"});
  bool saw_theta = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 5);
    if (rows[r][1].find("theta") != std::string::npos) saw_theta = true;
  }
  CHECK(saw_theta);
}

TEST_CASE("cli: options can come from a config file") {
  const fs::path base = fresh_dir("config");
  const fs::path direct = base / "direct";
  const fs::path via_cfg = base / "via_cfg";
  REQUIRE(run_cli("synth --n 12 --S 1 --noise 0.03 --blocks 6,6 --seed 9"
                  " --output " +
                  direct.string()) == 0);
  std::ostringstream cfg;
  cfg << "[synth]\n"
      << "n=12\nS=1\nnoise=0.03\nblocks=\"6,6\"\nseed=9\n"
      << "output=\"" << via_cfg.string() << "\"\n";
  spit(base / "run.toml", cfg.str());
  REQUIRE(run_cli("--config " + (base / "run.toml").string() + " synth") == 0);
  CHECK(slurp(direct / "graph_000.csv") == slurp(via_cfg / "graph_000.csv"));
}

}  // TEST_SUITE
