#include "slg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "slg/distributions.hpp"
#include "slg/partition.hpp"
#include "slg/stiefel.hpp"

namespace slg {

namespace {

constexpr int kMaxAttempts = 100;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

IntVector block_labels(const std::vector<int>& sizes, int n) {
  IntVector labels(n);
  int at = 0, b = 1;
  for (int sz : sizes) {
    for (int i = 0; i < sz; ++i) labels(at++) = b;
    ++b;
  }
  return labels;
}

}  // namespace

std::string manifest_text(const SynthSpec& spec) {
  std::ostringstream os;
  os << "scenario=" << spec.scenario << "\n";
  os << "n=" << spec.n << "\n";
  os << "S=" << spec.S << "\n";
  os << "T=" << spec.T << "\n";
  os << "noise=" << fmt_double(spec.noise) << "\n";
  os << "block_sizes=";
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i)
    os << (i ? "," : "") << spec.block_sizes[i];
  os << "\n";
  os << "pattern_count=" << spec.pattern_count << "\n";
  os << "communities=" << spec.communities << "\n";
  os << "seed=" << spec.seed << "\n";
  os << "cross_floor=" << fmt_double(spec.cross_floor) << "\n";
  return os.str();
}

SynthSpec parse_manifest(const std::string& text) {
  SynthSpec spec;
  spec.block_sizes.clear();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::ParseError, "manifest line missing '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    // stoi/stod stop at the first bad character; a manifest value must be
    // consumed in full or the line is corrupt.
    auto to_int = [](const std::string& v) {
      std::size_t pos = 0;
      const int x = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    };
    auto to_double = [](const std::string& v) {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    };
    auto to_u64 = [](const std::string& v) {
      std::size_t pos = 0;
      const std::uint64_t x = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    };
    try {
      if (key == "scenario") {
        spec.scenario = val;
      } else if (key == "n") {
        spec.n = to_int(val);
      } else if (key == "S") {
        spec.S = to_int(val);
      } else if (key == "T") {
        spec.T = to_int(val);
      } else if (key == "noise") {
        spec.noise = to_double(val);
      } else if (key == "block_sizes") {
        std::istringstream vs(val);
        std::string tok;
        while (std::getline(vs, tok, ','))
          if (!tok.empty()) spec.block_sizes.push_back(to_int(tok));
      } else if (key == "pattern_count") {
        spec.pattern_count = to_int(val);
      } else if (key == "communities") {
        spec.communities = to_int(val);
      } else if (key == "seed") {
        spec.seed = to_u64(val);
      } else if (key == "cross_floor") {
        spec.cross_floor = to_double(val);
      } else {
        fail(Errc::ParseError, "unknown manifest key: " + key);
      }
    } catch (const std::invalid_argument&) {
      fail(Errc::ParseError, "bad manifest value for " + key + ": " + val);
    } catch (const std::out_of_range&) {
      fail(Errc::ParseError, "manifest value out of range for " + key);
    }
  }
  return spec;
}

LabeledDataset generate(const SynthSpec& spec, Rng& rng) {
  if (spec.scenario == "planted-blocks") return gen_planted_blocks(spec, rng);
  if (spec.scenario == "latent-manifold") return gen_latent_manifold(spec.n, rng);
  if (spec.scenario == "hetero-population")
    return gen_hetero_population(spec, rng);
  if (spec.scenario == "prior-draw") return gen_prior_draw(spec, rng);
  fail(Errc::InvalidParam, "unknown scenario: " + spec.scenario);
}

LabeledDataset gen_planted_blocks(const SynthSpec& spec, Rng& rng) {
  const int n = spec.n;
  if (spec.block_sizes.empty())
    fail(Errc::InvalidParam, "planted-blocks needs block sizes");
  int sum = 0;
  for (int sz : spec.block_sizes) {
    if (sz < 1) fail(Errc::InvalidParam, "block sizes must be >= 1");
    sum += sz;
  }
  if (sum != n) fail(Errc::InvalidParam, "block sizes must sum to n");
  if (spec.S < 1) fail(Errc::InvalidParam, "need S >= 1");
  if (spec.noise < 0.0 || spec.cross_floor < 0.0)
    fail(Errc::InvalidParam, "noise and cross_floor must be >= 0");
  if (spec.noise == 0.0 && spec.cross_floor == 0.0 &&
      spec.block_sizes.size() > 1)
    fail(Errc::DisconnectedAtZeroNoise,
         "zero noise and zero cross-block floor cannot connect the blocks");

  const IntVector labels = block_labels(spec.block_sizes, n);
  LabeledDataset ds;
  ds.manifest = manifest_text(spec);
  for (int s = 0; s < spec.S; ++s) {
    Matrix A;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      A = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const bool within = labels(i) == labels(j);
          double w = within && rng.bernoulli(0.5) ? 1.0 : 0.0;
          if (spec.noise > 0.0) w += rng.normal(0.0, spec.noise);
          w = std::max(w, within ? 0.0 : spec.cross_floor);
          A(i, j) = A(j, i) = w;
        }
      ok = is_connected(A);
    }
    if (!ok)
      fail(Errc::DisconnectedGraph,
           "could not draw a connected planted graph in " +
               std::to_string(kMaxAttempts) + " attempts");
    ds.graphs.push_back(make_graph(std::move(A)));
    ds.true_labels.push_back(labels);
  }
  return ds;
}

LabeledDataset gen_latent_manifold(int n, Rng& rng) {
  if (n < 4 || n % 2 != 0)
    fail(Errc::InvalidParam, "latent-manifold needs even n >= 4");
  const int m = n / 2;
  const double span = 200.0 * M_PI / 180.0;
  const double radii[2] = {1.0, 1.6};
  const double jitter = 0.05;

  Matrix Y(n, 2);
  IntVector labels(n);
  for (int arc = 0; arc < 2; ++arc)
    for (int i = 0; i < m; ++i) {
      const double ang = -0.5 * span + span * i / (m - 1.0);
      const int v = arc * m + i;
      Y(v, 0) = radii[arc] * std::cos(ang) + rng.normal(0.0, jitter);
      Y(v, 1) = radii[arc] * std::sin(ang) + rng.normal(0.0, jitter);
      labels(v) = arc + 1;
    }

  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      A(i, j) = A(j, i) = std::exp(-10.0 * (Y.row(i) - Y.row(j)).norm());

  SynthSpec spec;
  spec.scenario = "latent-manifold";
  spec.n = n;
  spec.S = 1;
  spec.block_sizes.clear();
  LabeledDataset ds;
  ds.manifest = manifest_text(spec);
  ds.graphs.push_back(make_graph(std::move(A)));
  ds.true_labels.push_back(std::move(labels));
  return ds;
}

LabeledDataset gen_hetero_population(const SynthSpec& spec, Rng& rng) {
  const int n = spec.n, S = spec.S, C = spec.communities;
  if (C < 2 || n < C) fail(Errc::InvalidParam, "need 2 <= communities <= n");
  if (spec.pattern_count < 1 || S < 1)
    fail(Errc::InvalidParam, "need pattern_count >= 1 and S >= 1");
  if (spec.noise < 0.0) fail(Errc::InvalidParam, "noise must be >= 0");

  // Membership patterns drawn once per dataset; every community inhabited.
  std::vector<IntVector> patterns;
  for (int p = 0; p < spec.pattern_count; ++p) {
    IntVector c(n);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      std::vector<int> used(C, 0);
      for (int i = 0; i < n; ++i) {
        c(i) = 1 + static_cast<int>(rng.uniform_int(C));
        used[c(i) - 1] = 1;
      }
      ok = std::all_of(used.begin(), used.end(), [](int u) { return u == 1; });
    }
    if (!ok) fail(Errc::EmptyBlock, "could not inhabit every community");
    patterns.push_back(std::move(c));
  }

  LabeledDataset ds;
  ds.manifest = manifest_text(spec);
  for (int s = 0; s < S; ++s) {
    const int p = 1 + static_cast<int>(rng.uniform_int(spec.pattern_count));
    const IntVector& c = patterns[p - 1];
    Matrix A;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      Vector lam(C);
      for (int l = 0; l < C; ++l) lam(l) = 0.5 + rng.u01();
      A = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          double w = c(i) == c(j) ? lam(c(i) - 1) : 0.0;
          if (spec.noise > 0.0) w += rng.normal(0.0, spec.noise);
          A(i, j) = A(j, i) = std::max(w, 0.0);
        }
      ok = is_connected(A);
    }
    if (!ok) fail(Errc::DisconnectedGraph, "hetero graph stayed disconnected");
    ds.graphs.push_back(make_graph(std::move(A)));
    ds.true_labels.push_back(c);
    ds.true_pattern.push_back(p);
  }
  return ds;
}

LabeledDataset gen_prior_draw(const SynthSpec& spec, Rng& rng) {
  const int n = spec.n, T = spec.T, S = spec.S;
  if (T < 2 || T > n - 1) fail(Errc::InvalidParam, "need 2 <= T <= n-1");
  if (S < 1) fail(Errc::InvalidParam, "need S >= 1");
  if (spec.noise < 0.0) fail(Errc::InvalidParam, "sigma2_e must be >= 0");
  const double sd = std::sqrt(spec.noise);

  // One eigenmatrix and one spike pattern for the whole dataset, so graphs
  // share their community structure; eigenvalues vary per graph.
  const StiefelPoint U = sample_uniform_stiefel_star(n, T, rng);
  IntVector eta(T);
  eta(0) = 1;
  for (int k = 1; k < T; ++k) eta(k) = rng.bernoulli(0.5) ? 1 : 0;
  const int kappa = effective_kappa(eta);

  LabeledDataset ds;
  ds.manifest = manifest_text(spec);
  for (int s = 0; s < S; ++s) {
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      Vector lambda = Vector::Zero(T);
      for (int k = 1; k < T; ++k)
        lambda(k) = sample_truncnorm(
            {eta(k) == 1 ? 0.0 : 1.0, 0.1, 0.0, 2.0}, rng);
      const double theta = sample_truncnorm({1.0, 0.1, 0.0, 2.0}, rng);
      Matrix L = spiked_reconstruct({U.U, lambda, theta, eta});
      if (sd > 0.0) {
        for (int i = 0; i < n; ++i) {
          L(i, i) += rng.normal(0.0, sd * std::sqrt(2.0));
          for (int j = i + 1; j < n; ++j) {
            const double e = rng.normal(0.0, sd);
            L(i, j) += e;
            L(j, i) += e;
          }
        }
      }
      try {
        WeightedGraph g = recover_adjacency(L, U.U.col(0));
        g.A = g.A.cwiseMax(0.0);
        if (!is_connected(g.A)) continue;
        SignPartitionOptions opts;
        opts.theta = theta;
        opts.lenient = true;
        opts.compute_cut = false;
        ds.true_labels.push_back(
            sign_partition(U.U, lambda, kappa, opts).labels);
        ds.graphs.push_back(make_graph(std::move(g.A)));
        ok = true;
      } catch (const Error& e) {
        if (e.code() != Errc::NonPositiveFirstEigenvector) throw;
        // fall through to resample
      }
    }
    if (!ok)
      fail(Errc::RecoveredAdjacencyInvalid,
           "prior draws kept producing unusable adjacencies");
  }
  return ds;
}

double nmi(const IntVector& a, const IntVector& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) fail(Errc::ShapeMismatch, "label vectors differ in length");
  if (n < 1) fail(Errc::InvalidParam, "empty labelings");

  std::map<int, int> ia, ib;
  for (int i = 0; i < n; ++i) {
    ia.emplace(a(i), static_cast<int>(ia.size()));
    ib.emplace(b(i), static_cast<int>(ib.size()));
  }
  const int ka = static_cast<int>(ia.size());
  const int kb = static_cast<int>(ib.size());
  Matrix joint = Matrix::Zero(ka, kb);
  for (int i = 0; i < n; ++i) joint(ia[a(i)], ib[b(i)]) += 1.0;

  // Equal partitions up to relabeling: the contingency table is a (scaled)
  // permutation; return exactly 1 instead of accumulating log round-off.
  if (ka == kb) {
    bool perm = true;
    for (int r = 0; r < ka && perm; ++r)
      if ((joint.row(r).array() > 0.0).count() != 1) perm = false;
    for (int c = 0; c < kb && perm; ++c)
      if ((joint.col(c).array() > 0.0).count() != 1) perm = false;
    if (perm) return 1.0;
  }

  const Vector pa = joint.rowwise().sum() / n;
  const Vector pb = joint.colwise().sum().transpose() / n;
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (int r = 0; r < ka; ++r)
    if (pa(r) > 0.0) ha -= pa(r) * std::log(pa(r));
  for (int c = 0; c < kb; ++c)
    if (pb(c) > 0.0) hb -= pb(c) * std::log(pb(c));
  if (ha == 0.0 || hb == 0.0) return 0.0;  // one side constant, sides differ
  for (int r = 0; r < ka; ++r)
    for (int c = 0; c < kb; ++c) {
      const double p = joint(r, c) / n;
      if (p > 0.0) mi += p * std::log(p / (pa(r) * pb(c)));
    }
  return std::min(1.0, std::max(0.0, 2.0 * mi / (ha + hb)));
}

double rmse_laplacian(const PosteriorSamples& samples, int s,
                      const std::vector<NormalizedLaplacian>& data) {
  if (samples.samples.empty())
    fail(Errc::InsufficientSamples, "no posterior samples");
  if (s < 0 || s >= static_cast<int>(data.size()))
    fail(Errc::InvalidParam, "graph index out of range");
  const int n = static_cast<int>(data[s].L.rows());

  Matrix avg = Matrix::Zero(n, n);
  for (const auto& smp : samples.samples) {
    const GraphState& gs = smp.graphs[s];
    const Matrix& U = sample_atom_for(smp, s);
    Matrix mu = Matrix::Zero(n, n);
    for (int k = 0; k < gs.lambda.size(); ++k)
      if (gs.eta(k) == 1)
        mu += (gs.lambda(k) - gs.theta) * U.col(k) * U.col(k).transpose();
    mu.diagonal().array() += gs.theta;
    avg += mu;
  }
  avg /= static_cast<double>(samples.samples.size());
  return std::sqrt((avg - data[s].L).squaredNorm() / (n * n));
}

namespace {

// Standard Lloyd iterations from a k-means++ start; returns the objective.
double kmeans_once(const Matrix& X, int k, Rng& rng, std::vector<int>& labels) {
  const int n = static_cast<int>(X.rows());
  Matrix centers(k, X.cols());
  Vector d2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
  centers.row(0) = X.row(static_cast<int>(rng.uniform_int(n)));
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (X.row(i) - centers.row(c - 1)).squaredNorm());
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      const double u = rng.u01() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2(i);
        if (u < acc) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(n));
    }
    centers.row(c) = X.row(pick);
  }

  labels.assign(n, 0);
  for (int round = 0; round < 100; ++round) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = (X.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (X.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed && round > 0) break;
    for (int c = 0; c < k; ++c) {
      Vector mean = Vector::Zero(X.cols());
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (labels[i] == c) {
          mean += X.row(i).transpose();
          ++count;
        }
      if (count > 0) centers.row(c) = (mean / count).transpose();
    }
  }
  double obj = 0.0;
  for (int i = 0; i < n; ++i)
    obj += (X.row(i) - centers.row(labels[i])).squaredNorm();
  return obj;
}

}  // namespace

IntVector baseline_spectral_sbm(const Matrix& L, int k, Rng& rng) {
  const int n = static_cast<int>(L.rows());
  if (k < 2 || k > n) fail(Errc::InvalidParam, "need 2 <= k <= n");
  const Matrix X = full_eigendecomposition(L).W.leftCols(k);

  std::vector<int> best, cur;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 20; ++restart) {
    const double obj = kmeans_once(X, k, rng, cur);
    if (obj < best_obj) {
      best_obj = obj;
      best = cur;
    }
  }
  IntVector labels(n);
  for (int i = 0; i < n; ++i) labels(i) = best[i] + 1;
  return labels;
}

}  // namespace slg
