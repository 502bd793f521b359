#include "spincm/spectral_elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spincm/errors.hpp"

namespace spincm {

namespace {

void require_elliptic(const ModelSpec& spec, const char* who) {
  if (spec.family() != Family::elliptic) throw ValidationError(std::string(who) + ": needs the elliptic family");
}

Vec eigenvalues(const Mat& m) {
  Eigen::ComplexEigenSolver<Mat> es(m, false);
  return es.eigenvalues();
}

double min_gap(const Vec& lam) {
  double g = std::numeric_limits<double>::infinity();
  for (int i = 0; i < lam.size(); ++i)
    for (int j = i + 1; j < lam.size(); ++j) g = std::min(g, std::abs(lam(i) - lam(j)));
  return g;
}

cplx discriminant(const Vec& lam) {
  cplx d = 1.0;
  for (int i = 0; i < lam.size(); ++i)
    for (int j = i + 1; j < lam.size(); ++j) d *= (lam(i) - lam(j)) * (lam(i) - lam(j));
  return d;
}

/// I(z, w) = det(L(z) − wI) from the coefficients.
cplx eval_curve(const SpectralSample& s, cplx w) {
  const int n = static_cast<int>(s.a.size());
  cplx acc = std::pow(-w, n);
  cplx mw = 1.0;
  for (int k = 0; k < n; ++k) {
    acc += s.a[static_cast<size_t>(k)] * mw;
    mw *= -w;
  }
  return acc;
}

struct ContourFailure {
  std::string what;
};

int nearest_int(double x) { return static_cast<int>(std::lround(x)); }

class WindingCounter {
 public:
  WindingCounter(const ModelSpec& spec, const PhasePoint& pt) : spec_(spec), pt_(pt) {}

  cplx D(cplx z) {
    ++evaluations;
    return discriminant(eigenvalues(lax(spec_, pt_, z)));
  }

  /// Σ Δarg D along the segment a → b, steps refined until each |Δarg| < 0.5.
  double edge(cplx a, cplx b) {
    double total = 0.0;
    double s = 0.0, ds = 1.0 / 16.0;
    cplx cur = D(a);
    check_value(cur, a);
    while (s < 1.0) {
      const double sn = std::min(1.0, s + ds);
      const cplx zn = a + sn * (b - a);
      const cplx nxt = D(zn);
      check_value(nxt, zn);
      const double darg = std::arg(nxt / cur);
      if (std::abs(darg) >= 0.5) {
        ds *= 0.5;
        if (ds < 1e-10) throw ContourFailure{"contour passes through a discriminant zero"};
        continue;
      }
      total += darg;
      cur = nxt;
      s = sn;
      ds = std::min(2.0 * ds, 1.0 / 16.0);
    }
    return total;
  }

  /// Winding number of D around the parallelogram corner + [0,1]e1 + [0,1]e2.
  double cell(cplx corner, cplx e1, cplx e2) {
    const double t = edge(corner, corner + e1) + edge(corner + e1, corner + e1 + e2) +
                     edge(corner + e1 + e2, corner + e2) + edge(corner + e2, corner);
    return t / (2.0 * kPi);
  }

  double circle(cplx centre, double radius) {
    const int m = 64;
    double t = 0.0;
    for (int k = 0; k < m; ++k) {
      const cplx a = centre + std::polar(radius, 2.0 * kPi * k / m);
      const cplx b = centre + std::polar(radius, 2.0 * kPi * (k + 1) / m);
      t += edge(a, b);
    }
    return t / (2.0 * kPi);
  }

  /// −winding on circles of radius r, r/4, r/16, … down to r/1024; the two
  /// smallest must agree, so a zero of D close to 0 is not taken for the pole.
  int pole_order(double r) {
    int prev = 0, cur = 0;
    for (int k = 0; k <= 5; ++k) {
      prev = cur;
      cur = -nearest_int(circle(0.0, r * std::pow(0.25, k)));
    }
    if (cur != prev) throw ContourFailure{"pole order at z = 0 not stable under shrinking"};
    return cur;
  }

  long evaluations = 0;

 private:
  void check_value(cplx v, cplx z) const {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) < 1e-280) {
      std::ostringstream os;
      os << "discriminant vanishes or overflows on the contour at z = " << z;
      throw ContourFailure{os.str()};
    }
  }

  const ModelSpec& spec_;
  const PhasePoint& pt_;
};

}  // namespace

std::vector<cplx> characteristic_coefficients(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  std::vector<cplx> c(static_cast<size_t>(n) + 1);
  c[0] = 1.0;
  Mat M = Mat::Zero(n, n);
  const Mat I = Mat::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    M = x * M + c[static_cast<size_t>(k) - 1] * I;
    c[static_cast<size_t>(k)] = -(x * M).trace() / static_cast<double>(k);
  }
  return c;
}

SpectralSample char_poly_coeffs(const Mat& lax_matrix, cplx z) {
  const int n = static_cast<int>(lax_matrix.rows());
  const std::vector<cplx> c = characteristic_coefficients(lax_matrix);
  SpectralSample s;
  s.z = z;
  s.a.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int m = n - k;
    s.a[static_cast<size_t>(k)] = (m % 2 == 0 ? 1.0 : -1.0) * c[static_cast<size_t>(m)];
  }
  return s;
}

SpectralSample char_poly_coeffs(const ModelSpec& spec, const PhasePoint& pt, cplx z) {
  return char_poly_coeffs(lax(spec, pt, z), z);
}

Mat gauge_lax(const ModelSpec& spec, const PhasePoint& pt, cplx z) {
  require_elliptic(spec, "gauge_lax");
  const double scale = 1.0 + pt.xi.cwiseAbs().maxCoeff();
  if (pt.xi.diagonal().cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ContractError("gauge_lax requires J^-1(0): the diagonal of xi must vanish");
  const WeierstrassJet j = spec.lattice().jet(z);
  if (j.at_pole) throw PoleError("gauge_lax: z is a lattice point", j.nearest);
  Mat L = lax(spec, pt, z);
  for (int i = 0; i < L.rows(); ++i)
    for (int k = 0; k < L.cols(); ++k)
      if (i != k) L(i, k) *= std::exp(-j.zeta * (pt.q(i) - pt.q(k)));
  return L;
}

GenericityReport genericity_check(const ModelSpec& spec, const PhasePoint& pt, int grid) {
  require_elliptic(spec, "genericity_check");
  if (grid < 2) throw ValidationError("genericity_check: grid must be at least 2");
  GenericityReport rep;
  rep.grid = grid;
  rep.ga2_gap = min_gap(eigenvalues(pt.xi));
  rep.ga2_ok = rep.ga2_gap >= kGenericityThreshold;

  const EllipticLattice& lat = spec.lattice();
  const cplx e1 = 2.0 * lat.omega1(), e2 = 2.0 * lat.omega2();
  const cplx origin = -0.5 * (e1 + e2);
  const double h = 1e-5 * lat.min_period();
  double worst = std::numeric_limits<double>::infinity();
  int samples = 0, skipped = 0;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const cplx z = origin + e1 * ((a + 0.5) / grid) + e2 * ((b + 0.5) / grid);
      try {
        const Mat L = lax(spec, pt, z);
        const Vec lam = eigenvalues(L);
        const SpectralSample sp = char_poly_coeffs(lax(spec, pt, z + h), z + h);
        const SpectralSample sm = char_poly_coeffs(lax(spec, pt, z - h), z - h);
        for (int k = 0; k < lam.size(); ++k) {
          cplx dw = -1.0;
          for (int m = 0; m < lam.size(); ++m)
            if (m != k) dw *= (lam(m) - lam(k));
          const cplx dz = (eval_curve(sp, lam(k)) - eval_curve(sm, lam(k))) / (2.0 * h);
          worst = std::min(worst, std::abs(dw) + std::abs(dz));
          ++samples;
        }
      } catch (const DomainError&) {
        ++skipped;
      }
    }
  rep.ga1_min = worst;
  rep.ga1_ok = samples > 0 && worst >= kGenericityThreshold;
  std::ostringstream os;
  os << "GA1: " << samples << " curve points on a " << grid << "x" << grid << " z-grid";
  if (skipped) os << " (" << skipped << " z-samples skipped at poles)";
  os << ", min |dI/dw|+|dI/dz| = " << worst << "; GA2: min eigenvalue gap of xi = " << rep.ga2_gap;
  rep.details = os.str();
  return rep;
}

BranchReport branch_count_genus(const ModelSpec& spec, const PhasePoint& pt, int grid) {
  require_elliptic(spec, "branch_count_genus");
  if (grid < 1) throw ValidationError("branch_count_genus: grid must be positive");
  BranchReport rep;
  rep.grid = grid;
  rep.genericity = genericity_check(spec, pt);
  if (!rep.genericity.ga1_ok || !rep.genericity.ga2_ok)
    throw PreconditionError("branch_count_genus: genericity fails (" + rep.genericity.details + ")");

  const int n = spec.n();
  const EllipticLattice& lat = spec.lattice();
  const cplx e1 = 2.0 * lat.omega1(), e2 = 2.0 * lat.omega2();
  const double radius = 0.05 * lat.min_period();
  WindingCounter wc(spec, pt);

  std::string last_failure;
  for (int attempt = 0; attempt < 6; ++attempt) {
    rep.attempts = attempt + 1;
    const double j1 = 0.0137 * attempt, j2 = 0.0071 * attempt;
    const cplx corner = -(0.375 + j1) * e1 - (0.375 + j2) * e2;
    try {
      const int pole_order = wc.pole_order(radius);
      int zeros = 0, refined = 0;
      // (cell corner, cell edge fractions, depth)
      struct Cell {
        cplx c;
        double f;
        int depth;
      };
      std::vector<Cell> todo;
      for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b)
          todo.push_back({corner + e1 * (double(a) / grid) + e2 * (double(b) / grid), 1.0 / grid, 0});
      while (!todo.empty()) {
        const Cell cell = todo.back();
        todo.pop_back();
        const double w = wc.cell(cell.c, cell.f * e1, cell.f * e2);
        if (std::abs(w - std::round(w)) > 0.05) {
          if (cell.depth >= 4) throw ContourFailure{"winding stays ambiguous after refinement"};
          ++refined;
          const double h = 0.5 * cell.f;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) todo.push_back({cell.c + e1 * (a * h) + e2 * (b * h), h, cell.depth + 1});
          continue;
        }
        int count = nearest_int(w);
        // the cell holding z = 0 also encloses the pole
        const cplx rel = -cell.c;
        const double det = (e1 * std::conj(e2)).imag();
        const double u = (rel * std::conj(e2)).imag() / det / cell.f;
        const double v = -(rel * std::conj(e1)).imag() / det / cell.f;
        if (u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) count += pole_order;
        zeros += count;
      }
      rep.pole_order = pole_order;
      rep.branch_points = zeros;
      rep.refined_cells = refined;
      rep.evaluations = wc.evaluations;
      rep.genus = zeros / 2 + 1;
      rep.expected_genus = (n * n - n + 2) / 2;
      rep.matches_formula = zeros % 2 == 0 && rep.genus == rep.expected_genus;
      return rep;
    } catch (const ContourFailure& f) {
      last_failure = f.what;
    } catch (const DomainError& e) {
      last_failure = e.what();
    }
  }
  throw DomainError("branch_count_genus: contour failed after jittering (" + last_failure + ")");
}

double isospectral_drift(const ModelSpec& spec, const Trajectory& traj, const std::vector<cplx>& z_samples) {
  if (traj.size() == 0) return 0.0;
  double drift = 0.0;
  for (cplx z : z_samples) {
    const SpectralSample ref = char_poly_coeffs(spec, traj.states.front(), z);
    for (size_t t = 1; t < traj.size(); ++t) {
      const SpectralSample s = char_poly_coeffs(spec, traj.states[t], z);
      for (size_t k = 0; k < s.a.size(); ++k) drift = std::max(drift, std::abs(s.a[k] - ref.a[k]));
    }
  }
  return drift;
}

}  // namespace spincm
