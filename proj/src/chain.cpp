#include "kemeny/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "solve_detail.hpp"

namespace kemeny {

namespace {

// Adjacency of the positive-entry digraph. Off-diagonal only for
// generators; entries within [-tol, 0] are treated as structural zeros.
std::vector<std::vector<long>> positive_digraph(const Matrix& a, TimeKind kind,
                                                bool include_diagonal) {
  const long m = a.rows();
  std::vector<std::vector<long>> adj(m);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) {
      if (i == j && (kind == TimeKind::Continuous || !include_diagonal))
        continue;
      if (a(i, j) > 0.0) adj[i].push_back(j);
    }
  return adj;
}

std::vector<char> reachable(const std::vector<std::vector<long>>& adj,
                            long from) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<long> q;
  q.push(from);
  seen[from] = 1;
  while (!q.empty()) {
    long u = q.front();
    q.pop();
    for (long v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        q.push(v);
      }
  }
  return seen;
}

// gcd of cycle lengths of a strongly connected digraph via BFS levels.
long digraph_period(const std::vector<std::vector<long>>& adj) {
  const long m = static_cast<long>(adj.size());
  std::vector<long> level(m, -1);
  std::queue<long> q;
  q.push(0);
  level[0] = 0;
  long g = 0;
  while (!q.empty()) {
    long u = q.front();
    q.pop();
    for (long v : adj[u]) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
      g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
  }
  return g == 0 ? 1 : g;
}

}  // namespace

MarkovChain MarkovChain::validate(Matrix raw, TimeKind kind,
                                  std::vector<std::string> labels,
                                  ValidationOptions opts) {
  std::vector<Violation> violations;
  const long m = raw.rows();

  if (m < 1 || raw.cols() != m) {
    violations.push_back({Violation::Code::NotSquare, raw.rows(), raw.cols(),
                          0.0, {},
                          "matrix must be square with at least one state"});
    throw ChainValidationError("chain validation failed", violations);
  }
  if (!labels.empty() && static_cast<long>(labels.size()) != m)
    throw InvalidArgumentError("label list length does not match chain size");

  if (!raw.allFinite())
    violations.push_back({Violation::Code::NonFinite, -1, -1, 0.0, {},
                          "matrix contains non-finite entries"});

  for (long i = 0; i < m; ++i) {
    const double scale =
        std::max(1.0, raw.row(i).cwiseAbs().maxCoeff());
    const double tol = opts.tol * scale;
    const double sum = raw.row(i).sum();
    const double target = kind == TimeKind::Discrete ? 1.0 : 0.0;
    if (std::abs(sum - target) > tol) {
      std::ostringstream msg;
      msg << "row " << i << " sums to " << sum << " (expected " << target
          << ")";
      violations.push_back(
          {Violation::Code::RowSum, i, -1, sum - target, {}, msg.str()});
    }
    for (long j = 0; j < m; ++j) {
      const double v = raw(i, j);
      if (kind == TimeKind::Discrete) {
        if (v < -tol)
          violations.push_back({Violation::Code::NegativeEntry, i, j, v, {},
                                "negative transition probability"});
        else if (v > 1.0 + tol)
          violations.push_back({Violation::Code::EntryAboveOne, i, j, v - 1.0,
                                {}, "transition probability above one"});
      } else {
        if (i != j && v < -tol)
          violations.push_back({Violation::Code::NegativeEntry, i, j, v, {},
                                "negative off-diagonal rate"});
        if (i == j && v > tol)
          violations.push_back({Violation::Code::PositiveDiagonal, i, j, v, {},
                                "generator diagonal must be nonpositive"});
      }
    }
  }

  long period = 1;
  if (violations.empty()) {
    auto adj = positive_digraph(raw, kind, /*include_diagonal=*/true);
    auto fwd = reachable(adj, 0);
    auto rev_adj = std::vector<std::vector<long>>(m);
    for (long u = 0; u < m; ++u)
      for (long v : adj[u]) rev_adj[v].push_back(u);
    auto bwd = reachable(rev_adj, 0);
    std::vector<long> missing;
    for (long i = 0; i < m; ++i)
      if (!fwd[i] || !bwd[i]) missing.push_back(i);
    if (!missing.empty()) {
      std::ostringstream msg;
      msg << missing.size()
          << " state(s) not in the strongly connected component of state 0";
      violations.push_back({Violation::Code::NotIrreducible, -1, -1, 0.0,
                            std::move(missing), msg.str()});
    } else if (kind == TimeKind::Discrete) {
      period = digraph_period(adj);
    }
  }

  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "chain validation failed with " << violations.size()
        << " violation(s): " << violations.front().message;
    throw ChainValidationError(msg.str(), std::move(violations));
  }
  return MarkovChain(std::move(raw), kind, std::move(labels), period,
                     opts.tol);
}

StationaryDistribution stationary_distribution(const MarkovChain& chain,
                                               double tol) {
  const Matrix& a = chain.rates();
  Vector pi = detail::stationary_replaced_row<double>(a, chain.kind());

  // Extreme stationary ranges (graded birth-death truncations) can push
  // components to subnormals or below zero in double; redo in extended
  // precision before giving up.
  if (!pi.allFinite() || pi.minCoeff() <= 0.0 ||
      pi.minCoeff() < 1e-280 * pi.maxCoeff()) {
    auto al = a.cast<long double>().eval();
    auto pil = detail::stationary_replaced_row<long double>(al, chain.kind());
    pi = pil.cast<double>();
  }

  if (!pi.allFinite() || pi.minCoeff() <= 0.0)
    throw SingularSystemError(
        "stationary solve produced a nonpositive or non-finite component "
        "(numerically non-irreducible input)");

  double residual;
  if (chain.kind() == TimeKind::Discrete)
    residual = (a.transpose() * pi - pi).cwiseAbs().maxCoeff();
  else
    residual = (a.transpose() * pi).cwiseAbs().maxCoeff();

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (residual > std::max(tol, 1e-10) * scale)
    throw SingularSystemError("stationary residual " +
                              std::to_string(residual) +
                              " exceeds solver tolerance");
  return {std::move(pi), residual};
}

MarkovChain jump_chain(const MarkovChain& chain) {
  if (chain.kind() != TimeKind::Continuous)
    throw InvalidArgumentError("jump_chain requires a continuous chain");
  const Matrix& q = chain.rates();
  const long m = q.rows();
  Matrix p = Matrix::Zero(m, m);
  for (long i = 0; i < m; ++i) {
    const double qi = -q(i, i);
    if (!(qi > 0.0))
      throw AbsorbingStateError(
          "state " + std::to_string(i) + " has zero exit rate", i);
    for (long j = 0; j < m; ++j)
      if (j != i) p(i, j) = q(i, j) / qi;
    p.row(i) /= p.row(i).sum();  // rows sum to 1 by construction
  }
  return MarkovChain::validate(std::move(p), TimeKind::Discrete,
                               chain.labels());
}

}  // namespace kemeny
