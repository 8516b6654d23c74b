#include "slg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slg/partition.hpp"

namespace slg {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t derived_seed(std::uint64_t base, std::uint64_t a,
                           std::uint64_t b) {
  return Rng::stream(base, a, b).raw();
}

double measured_gap(const WeightedGraph& g) {
  const Vector omega = full_eigendecomposition(build_laplacian(g).L).omega;
  return omega(3) - omega(2);
}

BenchRow summarize(const std::string& method, const std::string& metric,
                   const std::vector<double>& vals) {
  BenchRow row{method, metric, 0.0, kNaN, static_cast<int>(vals.size())};
  if (vals.empty()) return row;
  double sum = 0.0;
  for (double v : vals) sum += v;
  row.mean = sum / vals.size();
  if (vals.size() >= 2) {
    double ss = 0.0;
    for (double v : vals) ss += (v - row.mean) * (v - row.mean);
    row.sd = std::sqrt(ss / (vals.size() - 1));
  }
  return row;
}

}  // namespace

LabeledDataset planted_with_gap(double lo, double hi, double target, int n,
                                const std::vector<int>& blocks,
                                std::uint64_t seed, double* xi_used,
                                double* gap_out, int S) {
  if (!(lo < hi) || !(target >= lo))
    fail(Errc::InvalidParam, "bad gap window");
  SynthSpec spec;
  spec.scenario = "planted-blocks";
  spec.n = n;
  spec.S = S;
  spec.block_sizes = blocks;
  spec.seed = seed;

  // The gap shrinks as noise grows; bisect the noise scale onto the target,
  // one draw per probe.
  double xlo = 1e-4, xhi = 2.0;
  for (int it = 0; it < 18; ++it) {
    spec.noise = 0.5 * (xlo + xhi);
    Rng rng = Rng::stream(seed, 1, static_cast<std::uint64_t>(it));
    const double gap = measured_gap(generate(spec, rng).graphs[0]);
    (gap > target ? xlo : xhi) = spec.noise;
  }

  double xi = 0.5 * (xlo + xhi);
  for (int a = 0; a < 2000; ++a) {
    spec.noise = xi;
    Rng rng = Rng::stream(seed, 2, static_cast<std::uint64_t>(a));
    LabeledDataset ds = generate(spec, rng);
    const double gap = measured_gap(ds.graphs[0]);
    if (gap >= lo && gap < hi) {
      if (xi_used) *xi_used = xi;
      if (gap_out) *gap_out = gap;
      return ds;
    }
    // keep nudging when draws miss consistently on one side
    xi *= gap >= hi ? 1.05 : 1.0 / 1.05;
  }
  fail(Errc::ConvergenceFailure, "no draw landed in the requested gap window");
}

PosteriorSamples fit_graphs(const std::vector<WeightedGraph>& graphs, int T,
                            int iters, std::uint64_t seed, int chains) {
  if (chains < 1) fail(Errc::InvalidParam, "chains must be positive");
  std::vector<NormalizedLaplacian> data;
  data.reserve(graphs.size());
  for (const auto& g : graphs) data.push_back(build_laplacian(g));
  HyperParams hp;
  hp.T = T;
  GibbsConfig cfg;
  cfg.iters = iters;
  cfg.burnin = iters / 3;
  cfg.thin = std::max(1, (iters - cfg.burnin) / 200);
  cfg.seed = seed;
  PosteriorSamples pooled;
  for (int c = 0; c < chains; ++c) {
    cfg.chain = c;
    PosteriorSamples one = run_chain(data, hp, cfg);
    if (c == 0) {
      pooled = std::move(one);
    } else {
      pooled.samples.insert(pooled.samples.end(),
                            std::make_move_iterator(one.samples.begin()),
                            std::make_move_iterator(one.samples.end()));
    }
  }
  return pooled;
}

IntVector posterior_labels(const PosteriorSamples& samples, int s, int kappa) {
  const auto& smps = samples.samples;
  if (smps.empty()) fail(Errc::InsufficientSamples, "no posterior samples");

  std::vector<IntVector> parts;
  parts.reserve(smps.size());
  for (const auto& smp : smps) {
    const GraphState& gs = smp.graphs[s];
    SignPartitionOptions opts;
    opts.theta = gs.theta;
    opts.lenient = true;
    opts.compute_cut = false;
    parts.push_back(
        sign_partition(sample_atom_for(smp, s), gs.lambda, kappa, opts).labels);
  }

  const int n = static_cast<int>(parts[0].size());
  Matrix co = Matrix::Zero(n, n);
  for (const auto& labels : parts)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (labels(i) == labels(j)) co(i, j) += 1.0;
  co /= static_cast<double>(parts.size());

  // Least-squares representative: for binary x, sum (x - c)^2 over pairs is
  // sum x (1 - 2c) plus a partition-independent constant.
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int m = 0; m < static_cast<int>(parts.size()); ++m) {
    double score = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (parts[m](i) == parts[m](j)) score += 1.0 - 2.0 * co(i, j);
    if (score < best_score) {
      best_score = score;
      best = m;
    }
  }
  return parts[best];
}

Vector posterior_mean_lambda(const PosteriorSamples& samples, int s) {
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "no posterior samples");
  Vector mean = Vector::Zero(samples.samples[0].graphs[s].lambda.size());
  for (const auto& smp : samples.samples) mean += smp.graphs[s].lambda;
  return mean / static_cast<double>(samples.samples.size());
}

Vector posterior_mean_eta(const PosteriorSamples& samples, int s) {
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "no posterior samples");
  Vector mean = Vector::Zero(samples.samples[0].graphs[s].eta.size());
  for (const auto& smp : samples.samples)
    mean += smp.graphs[s].eta.cast<double>();
  return mean / static_cast<double>(samples.samples.size());
}

double posterior_mean_theta(const PosteriorSamples& samples, int s) {
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "no posterior samples");
  double mean = 0.0;
  for (const auto& smp : samples.samples) mean += smp.graphs[s].theta;
  return mean / static_cast<double>(samples.samples.size());
}

std::vector<BenchRow> bench_table1(int reps_per_bin, int iters,
                                   std::uint64_t seed) {
  struct Bin {
    double lo, hi, target;
    const char* name;
  };
  const Bin bins[] = {
      {0.5, std::numeric_limits<double>::infinity(), 0.6, "gap>=0.50"},
      {0.2, 0.5, 0.3, "gap[0.20,0.50)"},
      {0.1, 0.2, 0.15, "gap[0.10,0.20)"},
      {0.05, 0.1, 0.075, "gap[0.05,0.10)"},
      {0.0, 0.05, 0.02, "gap<0.05"},
  };
  const std::vector<int> blocks = {10, 20, 30};
  std::vector<BenchRow> rows;
  for (int b = 0; b < 5; ++b) {
    std::vector<double> nmi_fit, nmi_base;
    for (int r = 0; r < reps_per_bin; ++r) {
      const std::uint64_t ds_seed = derived_seed(seed, 10 + b, r);
      const LabeledDataset ds = planted_with_gap(
          bins[b].lo, bins[b].hi, bins[b].target, 60, blocks, ds_seed);
      const PosteriorSamples samples =
          fit_graphs(ds.graphs, 6, iters, derived_seed(seed, 20 + b, r));
      nmi_fit.push_back(nmi(posterior_labels(samples, 0, 3), ds.true_labels[0]));
      Rng brng = Rng::stream(seed, 30 + b, r);
      nmi_base.push_back(nmi(
          baseline_spectral_sbm(build_laplacian(ds.graphs[0]).L, 3, brng),
          ds.true_labels[0]));
    }
    rows.push_back(summarize("spiked", std::string("nmi@") + bins[b].name,
                             nmi_fit));
    rows.push_back(summarize("spectral-sbm",
                             std::string("nmi@") + bins[b].name, nmi_base));
  }
  return rows;
}

std::vector<BenchRow> bench_table2(int replicates, int iters,
                                   std::uint64_t seed) {
  const std::vector<int> blocks = {17, 33, 50};
  std::vector<double> nmi_fit, nmi_base;
  for (int r = 0; r < replicates; ++r) {
    // Noise tuned so the spectral baseline lands near its reported accuracy
    // for 100 vertices; with a wide-open gap both methods saturate at 1 and
    // the comparison is vacuous.
    const LabeledDataset ds = planted_with_gap(0.01, 0.04, 0.025, 100, blocks,
                                               derived_seed(seed, 1, r));
    const PosteriorSamples samples =
        fit_graphs(ds.graphs, 6, iters, derived_seed(seed, 2, r));
    nmi_fit.push_back(nmi(posterior_labels(samples, 0, 3), ds.true_labels[0]));
    Rng brng = Rng::stream(seed, 3, r);
    nmi_base.push_back(
        nmi(baseline_spectral_sbm(build_laplacian(ds.graphs[0]).L, 3, brng),
            ds.true_labels[0]));
  }
  return {summarize("spiked", "nmi", nmi_fit),
          summarize("spectral-sbm", "nmi", nmi_base)};
}

std::vector<BenchRow> bench_table3(int iters, std::uint64_t seed) {
  SynthSpec spec;
  spec.scenario = "hetero-population";
  spec.n = 100;
  spec.S = 20;
  spec.pattern_count = 3;
  spec.communities = 4;
  spec.noise = 1.0;
  spec.seed = seed;
  Rng gen_rng = Rng::stream(seed, 0, 0);
  const LabeledDataset ds = generate(spec, gen_rng);

  std::vector<NormalizedLaplacian> data;
  for (const auto& g : ds.graphs) data.push_back(build_laplacian(g));
  const PosteriorSamples samples =
      fit_graphs(ds.graphs, 6, iters, derived_seed(seed, 1, 0));

  // Pooled baseline: one labeling and one truncated reconstruction from the
  // averaged Laplacian, applied to every graph.
  const int n = spec.n, kap = 4;
  Matrix Lbar = Matrix::Zero(n, n);
  for (const auto& d : data) Lbar += d.L;
  Lbar /= static_cast<double>(data.size());
  const EigenDecomposition eig = full_eigendecomposition(Lbar);
  Rng brng = Rng::stream(seed, 2, 0);
  const IntVector base_labels = baseline_spectral_sbm(Lbar, kap, brng);
  const double theta_bar = eig.omega.tail(n - kap).mean();
  Matrix Lhat = eig.W.leftCols(kap) *
                    (eig.omega.head(kap).array() - theta_bar)
                        .matrix()
                        .asDiagonal() *
                eig.W.leftCols(kap).transpose();
  Lhat.diagonal().array() += theta_bar;

  std::vector<double> nmi_fit, nmi_base, rmse_fit, rmse_base;
  for (int s = 0; s < spec.S; ++s) {
    nmi_fit.push_back(
        nmi(posterior_labels(samples, s, kap), ds.true_labels[s]));
    nmi_base.push_back(nmi(base_labels, ds.true_labels[s]));
    rmse_fit.push_back(rmse_laplacian(samples, s, data));
    rmse_base.push_back(std::sqrt((Lhat - data[s].L).squaredNorm() / (n * n)));
  }
  return {summarize("spiked", "nmi", nmi_fit),
          summarize("averaged-graph", "nmi", nmi_base),
          summarize("spiked", "rmse", rmse_fit),
          summarize("averaged-graph", "rmse", rmse_base)};
}

std::vector<BenchRow> bench_overspec(int iters, std::uint64_t seed) {
  // Medium-noise operating point (observed gap near 0.3): the bulk
  // eigenvalues sit tightly near 1, so the redundant spikes face a clear
  // slab-vs-spike decision, while the leading eigenvalues stay well below
  // the bulk for the T=10 vs T=30 stability comparison.  A small population
  // of replicate graphs anchors the shared spike/slab variances the way the
  // hierarchy is meant to be used; with a single graph those variances are
  // driven by their heavy-tailed prior and the indicators flicker.
  const int S = 6;
  const LabeledDataset ds =
      planted_with_gap(0.25, 0.35, 0.30, 60, {10, 20, 30},
                       derived_seed(seed, 1, 0), nullptr, nullptr, S);
  const PosteriorSamples fit10 =
      fit_graphs(ds.graphs, 10, iters, derived_seed(seed, 2, 0));
  const PosteriorSamples fit30 =
      fit_graphs(ds.graphs, 30, iters, derived_seed(seed, 3, 0));

  double eta_max = 0.0, shift_max = 0.0;
  double lam2_10 = 0.0, lam3_10 = 0.0, lam2_30 = 0.0, lam3_30 = 0.0;
  for (int s = 0; s < S; ++s) {
    const Vector eta10 = posterior_mean_eta(fit10, s);
    for (int k = 3; k < eta10.size(); ++k)
      eta_max = std::max(eta_max, eta10(k));
    const Vector lam10 = posterior_mean_lambda(fit10, s);
    const Vector lam30 = posterior_mean_lambda(fit30, s);
    for (int k : {1, 2})
      shift_max = std::max(shift_max, std::abs(lam10(k) - lam30(k)));
    lam2_10 += lam10(1) / S;
    lam3_10 += lam10(2) / S;
    lam2_30 += lam30(1) / S;
    lam3_30 += lam30(2) / S;
  }

  const int reps10 = static_cast<int>(fit10.samples.size());
  const int reps30 = static_cast<int>(fit30.samples.size());
  return {{"spiked-T10", "eta_mean_max_k_gt_3", eta_max, kNaN, reps10},
          {"spiked-T10", "lambda2_mean", lam2_10, kNaN, reps10},
          {"spiked-T10", "lambda3_mean", lam3_10, kNaN, reps10},
          {"spiked-T30", "lambda2_mean", lam2_30, kNaN, reps30},
          {"spiked-T30", "lambda3_mean", lam3_30, kNaN, reps30},
          {"spiked", "lambda_shift_max_k23", shift_max, kNaN, reps10}};
}

std::vector<BenchRow> bench_lifting(int iters, std::uint64_t seed) {
  const LabeledDataset ds = planted_with_gap(0.25, 0.35, 0.30, 60,
                                             {10, 20, 30},
                                             derived_seed(seed, 1, 0));
  const Vector omega =
      full_eigendecomposition(build_laplacian(ds.graphs[0]).L).omega;
  const PosteriorSamples samples =
      fit_graphs(ds.graphs, 6, iters, derived_seed(seed, 2, 0));
  const Vector lam = posterior_mean_lambda(samples, 0);
  const double theta = posterior_mean_theta(samples, 0);
  const int reps = static_cast<int>(samples.samples.size());
  return {{"raw", "lambda2", omega(1), kNaN, 1},
          {"raw", "lambda3", omega(2), kNaN, 1},
          {"raw", "lambda4", omega(3), kNaN, 1},
          {"spiked", "lambda2_mean", lam(1), kNaN, reps},
          {"spiked", "lambda3_mean", lam(2), kNaN, reps},
          {"spiked", "theta_mean", theta, kNaN, reps}};
}

}  // namespace slg
