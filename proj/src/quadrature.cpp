#include "vem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace vem {

namespace {

// Returns (P_n(x), P_{n-1}(x)) for n >= 1.
std::pair<double, double> legendre_pair(int n, double x) {
  double prev = 1.0, cur = x;
  for (int j = 2; j <= n; ++j) {
    const double next = ((2.0 * j - 1.0) * x * cur - (j - 1.0) * prev) / j;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pn1] = legendre_pair(n, x);
      const double dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pn1] = legendre_pair(n, x);
    const double dp = n * (x * pn - pn1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule segment_rule(const Point& a, const Point& b, int n) {
  const auto gl = gauss_legendre(n);
  const double half = 0.5 * (b - a).norm();
  QuadratureRule rule;
  rule.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (gl.nodes[i] + 1.0);
    rule.push_back({a + t * (b - a), half * gl.weights[i]});
  }
  return rule;
}

QuadratureRule triangle_rule(const Point& p0, const Point& p1, const Point& p2,
                             int degree) {
  // Map (u, v) in [0,1]^2 to the reference triangle by (u(1-v), v); the
  // Jacobian (1-v) raises the degree in v by one.
  const int n = std::max(1, (degree + 2 + 1) / 2);
  const auto gl = gauss_legendre(n);
  const Point e1 = p1 - p0;
  const Point e2 = p2 - p0;
  const double jac = e1.x() * e2.y() - e1.y() * e2.x();  // 2 * signed area
  QuadratureRule rule;
  rule.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (gl.nodes[j] + 1.0);
      const double s = u * (1.0 - v);
      const double t = v;
      const double w = 0.25 * gl.weights[i] * gl.weights[j] * (1.0 - v) * jac;
      rule.push_back({p0 + s * e1 + t * e2, w});
    }
  }
  return rule;
}

QuadratureRule polygon_rule(std::span<const Point> vertices, const Point& center,
                            int degree) {
  QuadratureRule rule;
  const std::size_t nv = vertices.size();
  for (std::size_t i = 0; i < nv; ++i) {
    auto tri = triangle_rule(center, vertices[i], vertices[(i + 1) % nv], degree);
    rule.insert(rule.end(), tri.begin(), tri.end());
  }
  return rule;
}

}  // namespace vem
