#include "kemeny/analysis.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "parallel_detail.hpp"
#include "solve_detail.hpp"

namespace kemeny {
namespace {

using detail::Mat;
using detail::Vec;

template <class Real>
Real abs_r(Real x) {
  return x < Real(0) ? -x : x;
}

template <class Real>
Real extreme_floor() {
  // below this fraction of the largest component a result is considered
  // out of Real's usable range and the computation gets escalated
  return std::numeric_limits<Real>::min() * Real(1e28);
}

// Keep full hitting profiles (for mfpt / identity checks) only up to this
// size; the per-target ops remain available for larger chains.
constexpr long kProfileCap = 4096;

// Precision-generic analysis kernel. `trouble` is set when results fall
// out of Real's usable range; callers rerun with a wider Real.
template <class Real>
struct Core {
  const MarkovChain& chain;
  Mat<Real> a;
  TimeKind kind;
  long m;
  bool tri;
  bool trouble = false;

  Vec<Real> pi;
  Real stationary_residual = Real(0);
  bool have_pi = false;

  // ladders for tridiagonal chains:
  // up[k]   = E_k[theta_{k+1}]  (k = 0 .. m-2)
  // down[k] = E_k[theta_{k-1}]  (k = 1 .. m-1)
  Vec<Real> up, down;
  bool have_ladders = false;

  explicit Core(const MarkovChain& c)
      : chain(c),
        a(c.rates().template cast<Real>()),
        kind(c.kind()),
        m(c.size()),
        tri(detail::is_tridiagonal(a)) {}

  // worker copy sharing the immutable inputs and precomputed ladders
  Core(const Core& other, int)
      : chain(other.chain),
        a(other.a),
        kind(other.kind),
        m(other.m),
        tri(other.tri),
        up(other.up),
        down(other.down),
        have_ladders(other.have_ladders) {}

  void ensure_pi() {
    if (have_pi) return;
    pi = detail::stationary_replaced_row(a, kind);
    if (!pi.allFinite() || pi.minCoeff() <= Real(0) ||
        pi.minCoeff() < extreme_floor<Real>() * pi.maxCoeff())
      trouble = true;
    if (kind == TimeKind::Discrete)
      stationary_residual = (a.transpose() * pi - pi).cwiseAbs().maxCoeff();
    else
      stationary_residual = (a.transpose() * pi).cwiseAbs().maxCoeff();
    have_pi = true;
  }

  void ensure_ladders() {
    if (have_ladders || !tri) return;
    up.resize(m - 1);
    down.resize(m);
    up(0) = Real(1) / a(0, 1);
    for (long k = 1; k < m - 1; ++k)
      up(k) = (Real(1) + a(k, k - 1) * up(k - 1)) / a(k, k + 1);
    down(m - 1) = Real(1) / a(m - 1, m - 2);
    for (long k = m - 2; k >= 1; --k)
      down(k) = (Real(1) + a(k, k + 1) * down(k + 1)) / a(k, k - 1);
    if (!up.allFinite() || !down.segment(1, m - 1).allFinite())
      trouble = true;
    have_ladders = true;
  }

  Vec<Real> hitting(long j, Real* residual = nullptr) {
    Vec<Real> h = Vec<Real>::Zero(m);
    if (m == 1) {
      if (residual) *residual = Real(0);
      return h;
    }
    if (tri) {
      ensure_ladders();
      for (long i = j - 1; i >= 0; --i) h(i) = h(i + 1) + up(i);
      for (long i = j + 1; i < m; ++i) h(i) = h(i - 1) + down(i);
    } else {
      Mat<Real> sub(m - 1, m - 1);
      for (long r = 0, i = 0; i < m; ++i) {
        if (i == j) continue;
        for (long c = 0, k = 0; k < m; ++k) {
          if (k == j) continue;
          sub(r, c) = kind == TimeKind::Discrete
                          ? (i == k ? Real(1) - a(i, k) : -a(i, k))
                          : -a(i, k);
          ++c;
        }
        ++r;
      }
      Vec<Real> rhs = Vec<Real>::Ones(m - 1);
      Eigen::PartialPivLU<Mat<Real>> lu(sub);
      Vec<Real> x = lu.solve(rhs);
      x += lu.solve(Vec<Real>(rhs - sub * x));
      for (long r = 0, i = 0; i < m; ++i) {
        if (i == j) continue;
        h(i) = x(r++);
      }
    }
    for (long i = 0; i < m; ++i)
      if (i != j && !(h(i) > Real(0)) ) trouble = true;
    if (!h.allFinite()) trouble = true;
    if (residual) *residual = hitting_residual(h, j);
    return h;
  }

  // max_i |(A h)_i - 1| / (1 + sum_k |A_ik| h_k) over the reduced system
  Real hitting_residual(const Vec<Real>& h, long j) const {
    Real worst = Real(0);
    for (long i = 0; i < m; ++i) {
      if (i == j) continue;
      Real lhs, scale;
      if (kind == TimeKind::Discrete) {
        Real s = Real(0);
        for (long k = 0; k < m; ++k)
          if (k != j) s += a(i, k) * h(k);
        lhs = h(i) - s;
        scale = Real(1) + h(i) + s;
      } else {
        Real s = Real(0), sc = Real(0);
        for (long k = 0; k < m; ++k) {
          if (k == j) continue;
          s += a(i, k) * h(k);
          sc += abs_r(a(i, k)) * h(k);
        }
        lhs = -s;
        scale = Real(1) + sc;
      }
      worst = std::max(worst, abs_r(lhs - Real(1)) / scale);
    }
    return worst;
  }

  struct Deviation {
    Mat<Real> d;
    Real fixed_res, row_res, null_res;
  };

  Deviation deviation() {
    ensure_pi();
    Mat<Real> one_pi = Vec<Real>::Ones(m) * pi.transpose();
    Mat<Real> A;
    if (kind == TimeKind::Discrete)
      A = Mat<Real>::Identity(m, m) - a + one_pi;
    else
      A = one_pi - a;
    Mat<Real> B = Mat<Real>::Identity(m, m) - one_pi;
    Eigen::PartialPivLU<Mat<Real>> lu(A);
    Mat<Real> X = lu.solve(B);
    X += lu.solve(Mat<Real>(B - A * X));
    if (!X.allFinite()) trouble = true;

    Mat<Real> M = kind == TimeKind::Discrete
                      ? Mat<Real>(Mat<Real>::Identity(m, m) - a)
                      : Mat<Real>(-a);
    Real fixed = (M * X - B).cwiseAbs().maxCoeff();
    Real row = (X * Vec<Real>::Ones(m)).cwiseAbs().maxCoeff();
    Real nul = (X.transpose() * pi).cwiseAbs().maxCoeff();
    return {std::move(X), fixed, row, nul};
  }

  struct KemenySums {
    Vec<Real> kps;               // per-start sums of pi_j E_i[theta_j]
    Real hitting_max_residual;
    Mat<Real> profiles;          // column j = hitting profile, if kept
    bool have_profiles = false;
  };

  // The per-target solves are independent; per-slot partials are combined
  // in slot order and the slot partition is fixed, so the result is
  // bitwise independent of the thread count and of scheduling.
  KemenySums kemeny_sums(bool keep_profiles) {
    ensure_pi();
    if (tri) ensure_ladders();
    keep_profiles = keep_profiles && m <= kProfileCap;
    const int slots =
        static_cast<int>(std::min<long>(detail::kAnalysisSlots, m));
    std::vector<Vec<Real>> partial(slots, Vec<Real>::Zero(m));
    std::vector<Real> res(slots, Real(0));
    std::vector<char> bad(slots, 0);
    KemenySums out{Vec<Real>::Zero(m), Real(0), {}, keep_profiles};
    if (keep_profiles) out.profiles.resize(m, m);
    detail::parallel_slots(
        m, slots, detail::default_threads(), [&](long lo, long hi, int slot) {
          Core<Real> local(*this, 0);
          for (long j = lo; j < hi; ++j) {
            Real r = Real(0);
            Vec<Real> h = local.hitting(j, &r);
            partial[slot] += pi(j) * h;
            res[slot] = std::max(res[slot], r);
            if (keep_profiles) out.profiles.col(j) = h;
          }
          if (local.trouble) bad[slot] = 1;
        });
    for (int s = 0; s < slots; ++s) {
      out.kps += partial[s];
      out.hitting_max_residual = std::max(out.hitting_max_residual, res[s]);
      if (bad[s]) trouble = true;
    }
    if (!out.kps.allFinite()) trouble = true;
    return out;
  }
};

double hunter_floor(long m) { return 0.5 * static_cast<double>(m + 1); }

template <class Real>
std::optional<AnalysisReport> kemeny_report(const MarkovChain& chain,
                                            double tol) {
  const long m = chain.size();
  const bool discrete = chain.kind() == TimeKind::Discrete;
  Core<Real> core(chain);
  core.ensure_pi();
  auto sums = core.kemeny_sums(/*keep_profiles=*/discrete);
  auto dev = core.deviation();
  if (core.trouble) return std::nullopt;

  AnalysisReport rep;
  rep.kprime_by_state = Vector(m);
  for (long i = 0; i < m; ++i)
    rep.kprime_by_state(i) = static_cast<double>(sums.kps(i));
  rep.kprime = static_cast<double>(Real(core.pi.dot(sums.kps)));
  rep.spread =
      static_cast<double>(Real(sums.kps.maxCoeff() - sums.kps.minCoeff()));
  rep.deviation_trace = static_cast<double>(Real(dev.d.trace()));
  if (discrete) {
    rep.k = rep.kprime + 1.0;
    rep.hunter_bound_ok =
        *rep.k >= hunter_floor(m) - 1e-9 * (1.0 + std::abs(*rep.k));
    if (sums.have_profiles) {
      Matrix mf(m, m);
      for (long j = 0; j < m; ++j)
        for (long i = 0; i < m; ++i)
          mf(i, j) = i == j ? static_cast<double>(Real(1) / core.pi(j))
                            : static_cast<double>(sums.profiles(i, j));
      rep.mfpt = std::move(mf);
    }
  }
  const double scale =
      static_cast<double>(chain.rates().cwiseAbs().maxCoeff());
  rep.residuals["stationary"] = static_cast<double>(core.stationary_residual);
  rep.residuals["hitting_max_relative"] =
      static_cast<double>(sums.hitting_max_residual);
  rep.residuals["deviation_fixed_point"] = static_cast<double>(dev.fixed_res);
  rep.residuals["deviation_row_sum"] = static_cast<double>(dev.row_res);
  rep.residuals["deviation_left_null"] = static_cast<double>(dev.null_res);
  rep.residuals["route_delta"] = std::abs(rep.kprime - rep.deviation_trace);
  rep.residuals["cross_check_tol"] =
      1e-12 * static_cast<double>(m) * (1.0 + scale);

  if (rep.spread > tol * (1.0 + std::abs(rep.kprime)))
    throw ConstancyViolationError(
        "per-start Kemeny sums disagree: spread " +
            std::to_string(rep.spread) + " exceeds tolerance",
        rep.spread, tol);
  return rep;
}

template <class Real>
std::optional<DeviationMatrix> deviation_impl(const MarkovChain& chain) {
  Core<Real> core(chain);
  auto dev = core.deviation();
  if (core.trouble) return std::nullopt;
  DeviationMatrix out;
  out.d = dev.d.template cast<double>();
  out.fixed_point_residual = static_cast<double>(dev.fixed_res);
  out.row_sum_residual = static_cast<double>(dev.row_res);
  out.left_null_residual = static_cast<double>(dev.null_res);
  return out;
}

template <class Real>
std::optional<IdentityReport> identity_impl(const MarkovChain& chain) {
  const long m = chain.size();
  Core<Real> core(chain);
  core.ensure_pi();
  auto sums = core.kemeny_sums(/*keep_profiles=*/true);
  auto dev = core.deviation();

  Real appendix = Real(0);
  {
    Core<Real> local(core, 0);
    for (long j = 0; j < m; ++j) {
      Vec<Real> h = sums.have_profiles ? Vec<Real>(sums.profiles.col(j))
                                       : local.hitting(j);
      for (long i = 0; i < m; ++i) {
        Real delta = core.pi(j) * h(i) - (dev.d(j, j) - dev.d(i, j));
        appendix = std::max(appendix, abs_r(delta));
      }
    }
    if (local.trouble) core.trouble = true;
  }
  if (core.trouble) return std::nullopt;

  IdentityReport rep;
  if (chain.kind() == TimeKind::Discrete) {
    Vec<Real> omega = sums.kps + Vec<Real>::Ones(m);
    rep.fixed_point_residual =
        static_cast<double>(Real((core.a * omega - omega).cwiseAbs().maxCoeff()));
  }
  rep.appendix_max_residual = static_cast<double>(appendix);
  rep.left_null_residual = static_cast<double>(dev.null_res);
  rep.row_sum_residual = static_cast<double>(dev.row_res);
  return rep;
}

}  // namespace

HittingProfile hitting_times(const MarkovChain& chain, long target) {
  if (target < 0 || target >= chain.size())
    throw InvalidArgumentError("hitting target out of range");
  Core<double> core(chain);
  Vec<double> h = core.hitting(target);
  if (core.trouble) {
    Core<long double> wide(chain);
    Vec<long double> hw = wide.hitting(target);
    if (wide.trouble)
      throw SingularSystemError("hitting-time solve failed for target " +
                                std::to_string(target));
    h = hw.cast<double>();  // components beyond double range become +inf
  }
  return {target, std::move(h)};
}

Matrix mfpt_matrix(const MarkovChain& chain) {
  if (chain.kind() != TimeKind::Discrete)
    throw InvalidArgumentError(
        "mean first passage matrix is defined for discrete chains");
  const long m = chain.size();
  auto st = stationary_distribution(chain);
  Matrix mf(m, m);
  for (long j = 0; j < m; ++j) {
    auto prof = hitting_times(chain, j);
    for (long i = 0; i < m; ++i)
      mf(i, j) = i == j ? 1.0 / st.pi(j) : prof.h(i);
  }
  return mf;
}

AnalysisReport kemeny_exact(const MarkovChain& chain, double tol) {
  if (chain.size() == 1) {
    AnalysisReport rep;
    rep.kprime_by_state = Vector::Zero(1);
    rep.kprime = 0.0;
    rep.spread = 0.0;
    rep.deviation_trace = 0.0;
    if (chain.kind() == TimeKind::Discrete) {
      rep.k = 1.0;
      rep.hunter_bound_ok = true;  // K = 1 = (m+1)/2
      rep.mfpt = Matrix::Ones(1, 1);
    }
    rep.residuals["stationary"] = 0.0;
    rep.residuals["route_delta"] = 0.0;
    return rep;
  }
  if (auto rep = kemeny_report<double>(chain, tol)) return *rep;
  if (auto rep = kemeny_report<long double>(chain, tol)) return *rep;
  throw SingularSystemError(
      "Kemeny analysis failed even in extended precision");
}

DeviationMatrix deviation_matrix(const MarkovChain& chain) {
  if (chain.size() == 1) return {Matrix::Zero(1, 1), 0.0, 0.0, 0.0};
  if (auto d = deviation_impl<double>(chain)) return *d;
  if (auto d = deviation_impl<long double>(chain)) return *d;
  throw SingularSystemError("deviation solve failed");
}

double kemeny_via_trace(const MarkovChain& chain) {
  return deviation_matrix(chain).d.trace();
}

IdentityReport identity_report(const MarkovChain& chain) {
  if (chain.size() == 1) {
    IdentityReport rep;
    if (chain.kind() == TimeKind::Discrete) rep.fixed_point_residual = 0.0;
    rep.appendix_max_residual = 0.0;
    rep.left_null_residual = 0.0;
    rep.row_sum_residual = 0.0;
    return rep;
  }
  if (auto r = identity_impl<double>(chain)) return *r;
  if (auto r = identity_impl<long double>(chain)) return *r;
  throw SingularSystemError("identity computation failed");
}

}  // namespace kemeny
