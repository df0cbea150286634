#include "acousim/positioning.hpp"

#include "acousim/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace acousim {

TofMode parse_tof_mode(std::string_view s) {
  if (s == "max") return TofMode::max;
  if (s == "prominence") return TofMode::prominence;
  fail(ErrorCode::InvalidArgument, "unknown tof mode '" + std::string(s) + "' (max|prominence)");
}

const char* to_string(TofMode m) { return m == TofMode::max ? "max" : "prominence"; }

double peak_prominence(std::span<const double> x, std::size_t i) {
  require(i < x.size(), "peak index out of range");
  const double h = x[i];
  double left = h;
  for (std::size_t j = i; j-- > 0;) {
    if (x[j] > h) break;
    left = std::min(left, x[j]);
  }
  double right = h;
  for (std::size_t j = i + 1; j < x.size(); ++j) {
    if (x[j] > h) break;
    right = std::min(right, x[j]);
  }
  return h - std::max(left, right);
}

TofEstimate estimate_tof(const CompressedEnvelope& env, const TofOptions& opts) {
  const auto& x = env.samples;
  require(!x.empty(), "envelope is empty");
  require(env.sample_rate_hz > 0.0, "envelope sample rate must be positive");
  const auto top = std::max_element(x.begin(), x.end());
  if (!(*top > 0.0)) fail(ErrorCode::NoPeakFound, "envelope has no positive sample");

  std::size_t pick = static_cast<std::size_t>(top - x.begin());
  double prominence = 0.0;
  if (opts.mode == TofMode::max) {
    prominence = peak_prominence(x, pick);
  } else {
    require(opts.min_prominence > 0.0 && opts.min_prominence <= 1.0, "min_prominence must lie in (0, 1]");
    const double threshold = opts.min_prominence * *top;
    bool found = false;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
      const double p = peak_prominence(x, i);
      if (p >= threshold) {
        pick = i;
        prominence = p;
        found = true;
        break;
      }
    }
    if (!found) fail(ErrorCode::NoPeakFound, "no peak reaches the prominence threshold");
  }

  double index = static_cast<double>(pick);
  if (opts.parabolic && pick > 0 && pick + 1 < x.size()) {
    const double a = x[pick - 1];
    const double b = x[pick];
    const double c = x[pick + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) index += 0.5 * (a - c) / denom;
  }
  TofEstimate out;
  out.index = index;
  out.tof_s = index / env.sample_rate_hz;
  out.prominence = prominence;
  return out;
}

RangeEstimate make_range(std::string anchor_id, const TofEstimate& tof, double speed_of_sound) {
  require(speed_of_sound > 0.0, "speed of sound must be positive");
  RangeEstimate r;
  r.anchor_id = std::move(anchor_id);
  r.tof_s = std::max(0.0, tof.tof_s);
  r.range_m = r.tof_s * speed_of_sound;
  r.peak_quality = tof.prominence;
  return r;
}

AnchorSet::AnchorSet(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
  std::map<std::string, int> seen;
  for (const Anchor& a : anchors_) {
    if (seen[a.id]++) fail(ErrorCode::InvalidArgument, "duplicate anchor id '" + a.id + "'");
  }
}

std::vector<Vec3> AnchorSet::positions() const {
  std::vector<Vec3> p;
  for (const Anchor& a : anchors_) p.push_back(a.position);
  return p;
}

namespace {

Vec3 mean_of(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

double planarity_of(std::span<const Vec3> pts) {
  if (pts.size() < 4) return 0.0;
  const Vec3 c = mean_of(pts);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - c).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 ? s(2) / s(0) : 0.0;
}

}  // namespace

double AnchorSet::planarity() const { return planarity_of(positions()); }

Method parse_method(std::string_view s) {
  if (s == "intersections") return Method::intersections;
  if (s == "bancroft") return Method::bancroft;
  if (s == "beck") return Method::beck;
  if (s == "cheung") return Method::cheung;
  if (s == "gauss_newton") return Method::gauss_newton;
  fail(ErrorCode::InvalidArgument,
       "unknown method '" + std::string(s) + "' (intersections|bancroft|beck|cheung|gauss_newton)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::intersections: return "intersections";
    case Method::bancroft: return "bancroft";
    case Method::beck: return "beck";
    case Method::cheung: return "cheung";
    case Method::gauss_newton: return "gauss_newton";
  }
  return "?";
}

std::vector<Method> all_methods() {
  return {Method::intersections, Method::bancroft, Method::beck, Method::cheung, Method::gauss_newton};
}

double range_cost(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double r = (x - anchors[i]).norm() - ranges[i];
    s += r * r;
  }
  return s;
}

double squared_range_cost(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double r = (x - anchors[i]).squaredNorm() - ranges[i] * ranges[i];
    s += r * r;
  }
  return s;
}

double residual_rms(std::span<const Vec3> anchors, std::span<const double> ranges, const Vec3& x) {
  return std::sqrt(range_cost(anchors, ranges, x) / static_cast<double>(anchors.size()));
}

namespace {

constexpr double kStepTolerance = 1e-10;
constexpr int kMaxIterations = 50;
constexpr int kIntersectionRefinementSteps = 50;

struct Iterate {
  Vec3 x;
  bool converged = false;
  int iterations = 0;
};

// Works in anchor-centered coordinates supplied by the caller.
Iterate gauss_newton(std::span<const Vec3> a, std::span<const double> r, Vec3 x, int max_iter) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd jac(n, 3);
  Eigen::VectorXd res(n);
  double cost = range_cost(a, r, x);
  Iterate it{x, false, 0};
  for (int k = 0; k < max_iter; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec3 v = x - a[static_cast<std::size_t>(i)];
      const double d = v.norm();
      res(i) = d - r[static_cast<std::size_t>(i)];
      jac.row(i) = d > 0.0 ? Eigen::RowVector3d((v / d).transpose()) : Eigen::RowVector3d::Zero();
    }
    const Vec3 delta = -jac.colPivHouseholderQr().solve(res);
    // Near the minimum cost changes drop below rounding; a comparison there
    // would cut steps short and stop early, so increases within the rounding
    // band count as descent.
    const double allowed = cost * (1.0 + 1e-12);
    double t = 1.0;
    Vec3 next = x + delta;
    double next_cost = range_cost(a, r, next);
    while (next_cost > allowed && t > 1e-12) {
      t *= 0.5;
      next = x + t * delta;
      next_cost = range_cost(a, r, next);
    }
    it.iterations = k + 1;
    if (next_cost > allowed) {
      // No descent along the step: the current iterate is stationary.
      it.converged = delta.norm() < 1e-6;
      break;
    }
    const double step = t * delta.norm();
    x = next;
    cost = next_cost;
    if (step < kStepTolerance) {
      it.converged = true;
      break;
    }
  }
  it.x = x;
  return it;
}

Vec3 intersections_start(std::span<const Vec3> a, std::span<const double> r) {
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const Vec3 axis = a[j] - a[i];
      const double d = axis.norm();
      const double t = (d * d + r[i] * r[i] - r[j] * r[j]) / (2.0 * d);
      sum += a[i] + t * axis / d;
      ++count;
    }
  }
  return sum / count;
}

// One algebraic pass with the coordinate origin at `o`: rows
// b_i^T x = alpha_i + lambda / 2 with lambda = |x|^2, the Lorentz inner
// product of (x, |x|) with itself.
Vec3 bancroft_pass(std::span<const Vec3> a, std::span<const double> r, const Vec3& o) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd b(n, 3);
  Eigen::VectorXd alpha(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 p = a[static_cast<std::size_t>(i)] - o;
    const double rho = r[static_cast<std::size_t>(i)];
    b.row(i) = p.transpose();
    alpha(i) = 0.5 * (p.squaredNorm() - rho * rho);
  }
  const auto qr = b.colPivHouseholderQr();
  if (qr.rank() < 3) fail(ErrorCode::DegenerateGeometry, "anchors do not span three dimensions");
  const Vec3 u = qr.solve(alpha);
  const Vec3 v = qr.solve(Eigen::VectorXd::Ones(n));
  const double qa = 0.25 * v.squaredNorm();
  const double qb = u.dot(v) - 1.0;
  const double qc = u.squaredNorm();
  std::vector<double> lambdas;
  if (qa <= 1e-300) {
    lambdas.push_back(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0.0) {
      lambdas.push_back(-qb / (2.0 * qa));
    } else {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (qb + std::copysign(s, qb));
      lambdas.push_back(q / qa);
      lambdas.push_back(qc / q);
    }
  }
  Vec3 best = o;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    const Vec3 x = u + 0.5 * lambda * v + o;
    const double c = squared_range_cost(a, r, x);
    if (c < best_cost) {
      best_cost = c;
      best = x;
    }
  }
  return best;
}

Vec3 unconstrained_squared_range(std::span<const Vec3> a, std::span<const double> r);

constexpr int kBancroftPasses = 3;

// The algebraic solution depends on where the origin sits. Starting from the
// unconstrained linear estimate and re-centering on each result reaches the
// point where the origin and the solution coincide.
Vec3 bancroft(std::span<const Vec3> a, std::span<const double> r) {
  Vec3 x = unconstrained_squared_range(a, r);
  for (int pass = 0; pass < kBancroftPasses; ++pass) {
    const Vec3 next = bancroft_pass(a, r, x);
    const double moved = (next - x).norm();
    x = next;
    if (moved < 1e-12) break;
  }
  return x;
}

struct SquaredRangeProblem {
  Eigen::MatrixXd g;  // rows [-2 a_i^T, 1]
  Eigen::VectorXd h;  // r_i^2 - |a_i|^2
};

SquaredRangeProblem squared_range_problem(std::span<const Vec3> a, std::span<const double> r) {
  const auto n = static_cast<Eigen::Index>(a.size());
  SquaredRangeProblem p{Eigen::MatrixXd(n, 4), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& ai = a[static_cast<std::size_t>(i)];
    p.g.row(i) << -2.0 * ai.x(), -2.0 * ai.y(), -2.0 * ai.z(), 1.0;
    const double rho = r[static_cast<std::size_t>(i)];
    p.h(i) = rho * rho - ai.squaredNorm();
  }
  return p;
}

Vec3 unconstrained_squared_range(std::span<const Vec3> a, std::span<const double> r) {
  const SquaredRangeProblem p = squared_range_problem(a, r);
  const auto qr = p.g.colPivHouseholderQr();
  if (qr.rank() < 4) fail(ErrorCode::DegenerateGeometry, "anchors are coplanar; squared-range system is singular");
  const Eigen::Vector4d theta = qr.solve(p.h);
  return theta.head<3>();
}

const Eigen::Matrix4d& constraint_matrix() {
  static const Eigen::Matrix4d d = Eigen::Vector4d(1.0, 1.0, 1.0, 0.0).asDiagonal();
  return d;
}

Vec3 beck(std::span<const Vec3> a, std::span<const double> r) {
  const SquaredRangeProblem p = squared_range_problem(a, r);
  const Eigen::Matrix4d m = p.g.transpose() * p.g;
  const Eigen::Vector4d atb = p.g.transpose() * p.h;
  const Eigen::Matrix4d& d = constraint_matrix();
  const Eigen::Vector4d f(0.0, 0.0, 0.0, -0.5);
  if (Eigen::FullPivLU<Eigen::Matrix4d>(m).rank() < 4) {
    fail(ErrorCode::DegenerateGeometry, "anchors are coplanar; squared-range system is singular");
  }

  auto solve = [&](double lambda) -> Eigen::Vector4d {
    return (m + lambda * d).ldlt().solve(atb - lambda * f);
  };
  auto phi = [&](double lambda) {
    const Eigen::Vector4d y = solve(lambda);
    return y.head<3>().squaredNorm() - y(3);
  };

  // phi decreases on (-1 / mu_max, inf), mu_max the largest eigenvalue of the
  // pencil (D, M).
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix4d> ges(d, m);
  const double mu_max = ges.eigenvalues().maxCoeff();
  const double lo_bound = -1.0 / mu_max;
  const double scale = std::max(1.0, std::abs(lo_bound));
  double lo = lo_bound + 1e-12 * scale;
  double hi = std::max(1.0, 2.0 * std::abs(lo_bound));
  for (int k = 0; k < 200 && phi(hi) > 0.0; ++k) hi *= 2.0;
  // Pull lo toward the pole until phi is positive.
  double step = 1e-12 * scale;
  while (phi(lo) < 0.0 && lo < hi) {
    step *= 10.0;
    lo = lo_bound + step;
    if (step > scale) break;
  }
  double lambda = 0.0;
  if (phi(lo) < 0.0) {
    lambda = lo;  // hard case: the constrained optimum sits at the pole
  } else {
    for (int k = 0; k < 400; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (phi(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lambda = 0.5 * (lo + hi);
  }
  return solve(lambda).head<3>();
}

using Poly = std::vector<double>;  // lowest degree first

Poly poly_mul(const Poly& p, const Poly& q) {
  Poly out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  }
  return out;
}

void poly_add(Poly& acc, const Poly& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
}

std::vector<double> real_roots(Poly p) {
  double peak = 0.0;
  for (double c : p) peak = std::max(peak, std::abs(c));
  while (p.size() > 1 && std::abs(p.back()) <= 1e-13 * peak) p.pop_back();
  const auto deg = static_cast<Eigen::Index>(p.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -p[static_cast<std::size_t>(i)] / p.back();
  const Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < deg; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z.real()))) roots.push_back(z.real());
  }
  return roots;
}

Vec3 cheung(std::span<const Vec3> a, std::span<const double> r) {
  const SquaredRangeProblem p = squared_range_problem(a, r);
  const Eigen::Matrix4d m = p.g.transpose() * p.g;
  const Eigen::Vector4d gth = p.g.transpose() * p.h;
  const Eigen::Matrix4d& pm = constraint_matrix();
  const Eigen::Vector4d q(0.0, 0.0, 0.0, -1.0);

  const Eigen::LLT<Eigen::Matrix4d> llt(m);
  if (llt.info() != Eigen::Success || Eigen::FullPivLU<Eigen::Matrix4d>(m).rank() < 4) {
    fail(ErrorCode::DegenerateGeometry, "anchors are coplanar; squared-range system is singular");
  }
  const Eigen::Matrix4d l = llt.matrixL();
  const Eigen::Matrix4d linv = l.triangularView<Eigen::Lower>().solve(Eigen::Matrix4d::Identity());
  const Eigen::Matrix4d s = linv * pm * linv.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (s + s.transpose()));
  const Eigen::Vector4d gamma = es.eigenvalues();
  const Eigen::Matrix4d v = es.eigenvectors();
  const Eigen::Vector4d c = v.transpose() * (linv * gth);
  const Eigen::Vector4d e = 0.5 * (v.transpose() * (linv * q));

  // phi(lambda) = sum g_i w_i^2 + 2 sum e_i w_i, w_i = (c_i - lambda e_i) / (1 + lambda g_i),
  // cleared of denominators.
  Poly num;
  for (int i = 0; i < 4; ++i) {
    Poly others{1.0};
    for (int k = 0; k < 4; ++k) {
      if (k == i) continue;
      const Poly f{1.0, gamma(k)};
      others = poly_mul(others, poly_mul(f, f));
    }
    const Poly lin{c(i), -e(i)};
    poly_add(num, poly_mul(poly_mul(Poly{gamma(i)}, poly_mul(lin, lin)), others));
    poly_add(num, poly_mul(poly_mul(Poly{2.0 * e(i)}, poly_mul(lin, Poly{1.0, gamma(i)})), others));
  }

  auto phi_and_slope = [&](double lambda, double& slope) {
    double phi = 0.0;
    slope = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double den = 1.0 + lambda * gamma(i);
      const double w = (c(i) - lambda * e(i)) / den;
      const double dw = -(e(i) + gamma(i) * c(i)) / (den * den);
      phi += gamma(i) * w * w + 2.0 * e(i) * w;
      slope += 2.0 * gamma(i) * w * dw + 2.0 * e(i) * dw;
    }
    return phi;
  };

  Vec3 best = Vec3::Zero();
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](double lambda) {
    const Eigen::Matrix4d k = m + lambda * pm;
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(k);
    if (!lu.isInvertible()) return;
    const Eigen::Vector4d theta = lu.solve(gth - 0.5 * lambda * q);
    const Vec3 x = theta.head<3>();
    const double cost = squared_range_cost(a, r, x);
    if (std::isfinite(cost) && cost < best_cost) {
      best_cost = cost;
      best = x;
    }
  };
  for (double lambda : real_roots(num)) {
    for (int k = 0; k < 20; ++k) {
      double slope = 0.0;
      const double f = phi_and_slope(lambda, slope);
      if (slope == 0.0 || !std::isfinite(f)) break;
      const double next = lambda - f / slope;
      if (!std::isfinite(next)) break;
      const bool done = std::abs(next - lambda) <= 1e-15 * (1.0 + std::abs(lambda));
      lambda = next;
      if (done) break;
    }
    consider(lambda);
  }
  if (!std::isfinite(best_cost)) consider(0.0);
  return best;
}

void check_inputs(std::span<const Vec3> anchors, std::span<const double> ranges) {
  require(anchors.size() == ranges.size(), "need exactly one range per anchor");
  require(anchors.size() >= 4, "multilateration needs at least 4 anchors");
  for (double r : ranges) require(std::isfinite(r) && r >= 0.0, "ranges must be finite and nonnegative");
  double scale = 0.0;
  for (const Vec3& p : anchors) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      if ((anchors[i] - anchors[j]).norm() <= 1e-9 * (1.0 + scale)) {
        fail(ErrorCode::DegenerateGeometry, "coincident anchors");
      }
    }
  }
}

}  // namespace

PositionEstimate multilaterate(std::span<const Vec3> anchors, std::span<const double> ranges, Method method) {
  check_inputs(anchors, ranges);
  const bool closed_form = method == Method::bancroft || method == Method::beck || method == Method::cheung;
  if (closed_form && planarity_of(anchors) < 1e-9) {
    fail(ErrorCode::DegenerateGeometry, "coplanar anchors make the closed-form system singular");
  }
  // Solve in centroid-relative coordinates for conditioning.
  const Vec3 origin = mean_of(anchors);
  std::vector<Vec3> a(anchors.begin(), anchors.end());
  for (Vec3& p : a) p -= origin;

  PositionEstimate est;
  est.method = method;
  switch (method) {
    case Method::gauss_newton: {
      const Iterate it = gauss_newton(a, ranges, Vec3::Zero(), kMaxIterations);
      est.position = it.x;
      est.converged = it.converged;
      est.iterations = it.iterations;
      break;
    }
    case Method::intersections: {
      const Iterate it = gauss_newton(a, ranges, intersections_start(a, ranges), kIntersectionRefinementSteps);
      est.position = it.x;
      est.converged = it.converged;
      est.iterations = it.iterations;
      break;
    }
    case Method::bancroft: est.position = bancroft(a, ranges); break;
    case Method::beck: est.position = beck(a, ranges); break;
    case Method::cheung: est.position = cheung(a, ranges); break;
  }
  est.position += origin;
  est.residual_rms = residual_rms(anchors, ranges, est.position);
  return est;
}

PositionEstimate multilaterate(const AnchorSet& anchors, std::span<const RangeEstimate> ranges, Method method) {
  require(ranges.size() == anchors.size(), "need exactly one range per anchor");
  std::vector<double> r(anchors.size());
  std::vector<bool> seen(anchors.size(), false);
  for (const RangeEstimate& est : ranges) {
    const auto list = anchors.anchors();
    const auto it = std::find_if(list.begin(), list.end(), [&](const Anchor& a) { return a.id == est.anchor_id; });
    require(it != list.end(), "range for unknown anchor '" + est.anchor_id + "'");
    const auto idx = static_cast<std::size_t>(it - list.begin());
    require(!seen[idx], "duplicate range for anchor '" + est.anchor_id + "'");
    seen[idx] = true;
    r[idx] = est.range_m;
  }
  const std::vector<Vec3> pos = anchors.positions();
  return multilaterate(pos, r, method);
}

}  // namespace acousim
