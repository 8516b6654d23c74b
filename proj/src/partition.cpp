#include "slg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace slg {

int effective_kappa(const IntVector& eta) {
  if (eta.size() < 1) fail(Errc::InvalidParam, "eta is empty");
  int kappa = 0;
  for (int k = 0; k < eta.size(); ++k) {
    if (eta(k) != 0 && eta(k) != 1)
      fail(Errc::InvalidParam, "eta entries must be 0 or 1");
    kappa += eta(k);
  }
  return kappa;
}

PartitionResult sign_partition(const Matrix& Q, const Vector& lambda,
                               int kappa, const SignPartitionOptions& opts) {
  const int n = static_cast<int>(Q.rows());
  const int T = static_cast<int>(Q.cols());
  if (lambda.size() != T)
    fail(Errc::ShapeMismatch, "lambda length differs from Q's column count");
  if (!Q.allFinite() || !lambda.allFinite())
    fail(Errc::InvalidParam, "non-finite entries in Q or lambda");
  if (kappa < 1 || kappa > T || kappa > n)
    fail(Errc::InvalidParam, "need 1 <= kappa <= min(T, n)");

  std::vector<int> ord(T);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(),
                   [&](int a, int b) { return lambda(a) < lambda(b); });

  IntVector labels = IntVector::Ones(n);
  int kap = 1;
  for (int r = 1; r < kappa; ++r) {
    const Vector q = Q.col(ord[r]);

    // Pick the block where splitting by sign relieves the most mass: the
    // product of the positive and negative entry sums, doubled, is the
    // block's contribution to q' (something PSD) q that a split removes.
    int best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int b = 1; b <= kap; ++b) {
      double pos = 0.0, neg = 0.0;
      for (int i = 0; i < n; ++i) {
        if (labels(i) != b) continue;
        if (q(i) > 0.0)
          pos += q(i);
        else
          neg += q(i);  // zeros contribute nothing either way
      }
      const double loss = 2.0 * pos * neg;
      if (loss < best_loss) {  // strict: ties keep the smallest block index
        best_loss = loss;
        best = b;
      }
    }

    bool any_nonneg = false, any_neg = false;
    for (int i = 0; i < n; ++i) {
      if (labels(i) != best) continue;
      (q(i) < 0.0 ? any_neg : any_nonneg) = true;
    }
    if (!any_nonneg || !any_neg) {
      if (!opts.lenient)
        fail(Errc::EmptySplit, "sign split leaves one side of block " +
                                   std::to_string(best) + " empty");
      continue;
    }
    ++kap;
    for (int i = 0; i < n; ++i)
      if (labels(i) == best && q(i) < 0.0) labels(i) = kap;
  }

  PartitionResult res;
  res.labels = std::move(labels);
  res.kappa = kap;
  res.cheeger_ceiling = 0.0;
  res.cut_loss = 0.0;
  if (kap >= 2) {
    Vector lam_sorted(T);
    for (int t = 0; t < T; ++t) lam_sorted(t) = lambda(ord[t]);
    res.cheeger_ceiling = cheeger_bound(kap, lam_sorted);
    if (opts.compute_cut) {
      Matrix Qs(n, T);
      for (int t = 0; t < T; ++t) Qs.col(t) = Q.col(ord[t]);
      // Raw eigendecompositions carry lambda_1 = +-eps; snap it so the
      // reconstruction accepts them.
      if (std::abs(lam_sorted(0)) <= 1e-8) lam_sorted(0) = 0.0;
      SpikedDecomposition d{Qs, lam_sorted, opts.theta, IntVector::Ones(T)};
      try {
        WeightedGraph g = recover_adjacency(spiked_reconstruct(d), Qs.col(0));
        g.A = g.A.cwiseMax(0.0);
        std::vector<int> lv(res.labels.data(), res.labels.data() + n);
        res.cut_loss = normalized_cut_loss(g, lv);
      } catch (const Error& e) {
        // No usable adjacency behind this spectrum: report an infinite cut
        // rather than failing the whole partition (the labels are still good).
        if (e.code() == Errc::NonPositiveFirstEigenvector ||
            e.code() == Errc::DegenerateDenominator ||
            e.code() == Errc::OutOfSupport)
          res.cut_loss = std::numeric_limits<double>::infinity();
        else
          throw;
      }
    }
  }
  return res;
}

namespace {

// Potentials form of the Hungarian method on a square min-cost matrix.
std::vector<int> min_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<int> max_assignment(const Matrix& score) {
  if (score.rows() != score.cols() || score.rows() < 1)
    fail(Errc::ShapeMismatch, "score matrix must be square and nonempty");
  if (!score.allFinite())
    fail(Errc::InvalidParam, "score matrix has non-finite entries");
  return min_assignment(-score);
}

LabelUncertainty aggregate_uncertainty(const PosteriorSamples& samples, int s,
                                       int force_kappa) {
  const auto& smps = samples.samples;
  if (static_cast<int>(smps.size()) < 10)
    fail(Errc::InsufficientSamples,
         "need at least 10 posterior samples, have " +
             std::to_string(smps.size()));
  if (s < 0 || s >= static_cast<int>(smps.front().graphs.size()))
    fail(Errc::InvalidParam, "graph index out of range");
  if (force_kappa < 0) fail(Errc::InvalidParam, "force_kappa must be >= 0");

  // Reference labeling: the sample with the highest joint density.
  int ref_idx = 0;
  for (int i = 1; i < static_cast<int>(smps.size()); ++i)
    if (smps[i].log_joint > smps[ref_idx].log_joint) ref_idx = i;

  const auto partition_of = [&](const PosteriorSample& smp,
                                bool with_cut) -> PartitionResult {
    const GraphState& gs = smp.graphs[s];
    const int kap =
        force_kappa > 0 ? force_kappa : effective_kappa(gs.eta);
    SignPartitionOptions opts;
    opts.theta = gs.theta;
    opts.lenient = true;
    opts.compute_cut = with_cut;
    return sign_partition(sample_atom_for(smp, s), gs.lambda, kap, opts);
  };

  LabelUncertainty out;
  out.reference = partition_of(smps[ref_idx], true);
  const int kr = out.reference.kappa;
  const int n = static_cast<int>(out.reference.labels.size());
  out.prob = Matrix::Zero(n, kr);

  std::map<int, int> hist;
  for (const auto& smp : smps) {
    const PartitionResult part = partition_of(smp, false);
    ++hist[part.kappa];

    // Align to the reference by maximum overlap on a square padded matrix;
    // sample blocks matched to padding get re-pointed at their best real
    // reference block so every vertex lands in a real column.
    const int m = std::max(kr, part.kappa);
    Matrix overlap = Matrix::Zero(m, m);
    for (int i = 0; i < n; ++i)
      overlap(part.labels(i) - 1, out.reference.labels(i) - 1) += 1.0;
    const std::vector<int> to_ref = max_assignment(overlap);
    std::vector<int> mapped(part.kappa);
    for (int b = 0; b < part.kappa; ++b) {
      int r = to_ref[b];
      if (r >= kr) {
        r = 0;
        for (int c = 1; c < kr; ++c)
          if (overlap(b, c) > overlap(b, r)) r = c;
      }
      mapped[b] = r;
    }
    for (int i = 0; i < n; ++i) out.prob(i, mapped[part.labels(i) - 1]) += 1.0;
  }
  out.prob /= static_cast<double>(smps.size());
  for (const auto& [kap, count] : hist)
    out.kappa_histogram.emplace_back(kap, count / static_cast<double>(smps.size()));
  return out;
}

}  // namespace slg
