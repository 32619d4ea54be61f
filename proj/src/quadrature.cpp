#include "crackfreq/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "crackfreq/errors.hpp"

namespace crackfreq::quad {

namespace {

Rule1D build_gauss_legendre(int n) {
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

double gauss(const std::function<double(double)>& f, double a, double b, int n) {
  const Rule1D& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, int n) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) sum += gauss(f, a + p * h, a + (p + 1) * h, n);
  return sum;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double graded_to_zero(const std::function<double(double)>& f, double r, int panels,
                      int points) {
  if (r <= 0.0) return 0.0;
  double sum = 0.0;
  double last = 0.0;
  double before_last = 0.0;
  double hi = r;
  for (int m = 0; m < panels; ++m) {
    const double lo = 0.5 * hi;
    const double c = gauss(f, lo, hi, points);
    sum += c;
    before_last = last;
    last = c;
    hi = lo;
  }
  // Contributions of a power-law integrand shrink geometrically per panel.
  if (before_last != 0.0) {
    const double ratio = last / before_last;
    if (ratio > 0.0 && ratio < 1.0) sum += last * ratio / (1.0 - ratio);
  }
  return sum;
}

Graded graded_nodes(double r, int panels, int points) {
  const Rule1D& rule = gauss_legendre(points);
  Graded g;
  g.nodes.reserve(static_cast<std::size_t>(panels) * points);
  g.weights.reserve(g.nodes.capacity());
  double hi = r;
  for (int m = 0; m < panels; ++m) {
    const double lo = 0.5 * hi;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int i = 0; i < points; ++i) {
      g.nodes.push_back(mid + half * rule.nodes[i]);
      g.weights.push_back(half * rule.weights[i]);
    }
    hi = lo;
  }
  return g;
}

const TriangleRule& triangle_degree2() {
  static const TriangleRule rule{
      {{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}},
       {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}},
       {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

const TriangleRule& triangle_degree5() {
  constexpr double a1 = 0.059715871789770;
  constexpr double b1 = 0.470142064105115;
  constexpr double a2 = 0.797426985353087;
  constexpr double b2 = 0.101286507323456;
  constexpr double w0 = 0.225;
  constexpr double w1 = 0.132394152788506;
  constexpr double w2 = 0.125939180544827;
  static const TriangleRule rule{
      {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
       {{a1, b1, b1}},
       {{b1, a1, b1}},
       {{b1, b1, a1}},
       {{a2, b2, b2}},
       {{b2, a2, b2}},
       {{b2, b2, a2}}},
      {w0, w1, w1, w1, w2, w2, w2}};
  return rule;
}

}  // namespace crackfreq::quad
