#include "eespt/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

namespace eespt {

namespace {

// Nodes/weights for weight (1-x)^alpha on [0,1] via Golub-Welsch on the
// monic Jacobi recurrence (beta parameter fixed to 0).
void gauss_jacobi(int n, double alpha, std::vector<double>& x, std::vector<double>& w) {
  const double a = alpha, b = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  auto rec_a = [&](int k) {
    double den = (2.0 * k + a + b) * (2.0 * k + a + b + 2.0);
    if (den == 0.0) return (b - a) / (a + b + 2.0);
    return (b * b - a * a) / den;
  };
  auto rec_b = [&](int k) {
    // k >= 1
    double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
    double den = std::pow(2.0 * k + a + b, 2) * (2.0 * k + a + b + 1.0) * (2.0 * k + a + b - 1.0);
    return num / den;
  };
  for (int k = 0; k < n; ++k) {
    J(k, k) = rec_a(k);
    if (k > 0) {
      double sb = std::sqrt(rec_b(k));
      J(k, k - 1) = sb;
      J(k - 1, k) = sb;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  // mu0 = integral of the weight over [-1,1]: 2^(a+b+1) * B(a+1, b+1)
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                     std::tgamma(a + b + 2.0);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    // Map [-1,1] -> [0,1]; the weight picks up 2^(a+1) overall, folded into mu0.
    x[i] = 0.5 * (1.0 + t);
    w[i] = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

int points_for(int deg) { return deg / 2 + 1; }  // 2n-1 >= deg

}  // namespace

QuadRule gauss_segment(int n) {
  std::vector<double> x, w;
  gauss_jacobi(n, 0.0, x, w);
  QuadRule r;
  for (int i = 0; i < n; ++i) {
    r.points.push_back({x[i], 0.0, 0.0});
    r.weights.push_back(w[i]);
  }
  return r;
}

namespace {

QuadRule make_triangle(int deg) {
  const int n = points_for(deg);
  std::vector<double> xu, wu, xv, wv;
  gauss_jacobi(n, 1.0, xu, wu);  // weight (1-u)
  gauss_jacobi(n, 0.0, xv, wv);
  QuadRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double u = xu[i], v = xv[j];
      r.points.push_back({u, v * (1.0 - u), 0.0});
      r.weights.push_back(wu[i] * wv[j]);
    }
  return r;
}

QuadRule make_tetrahedron(int deg) {
  const int n = points_for(deg);
  std::vector<double> xu, wu, xv, wv, xw, ww;
  gauss_jacobi(n, 2.0, xu, wu);  // weight (1-u)^2
  gauss_jacobi(n, 1.0, xv, wv);  // weight (1-v)
  gauss_jacobi(n, 0.0, xw, ww);
  QuadRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double u = xu[i], v = xv[j], w = xw[k];
        r.points.push_back({u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)});
        r.weights.push_back(wu[i] * wv[j] * ww[k]);
      }
  return r;
}

QuadRule make_segment(int deg) { return gauss_segment(points_for(deg)); }

const QuadRule& cached(int which, int deg) {
  static std::map<std::pair<int, int>, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(which, deg);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadRule r;
    switch (which) {
      case 1: r = make_segment(deg); break;
      case 2: r = make_triangle(deg); break;
      default: r = make_tetrahedron(deg); break;
    }
    it = cache.emplace(key, std::move(r)).first;
  }
  return it->second;
}

}  // namespace

const QuadRule& triangle_rule(int deg) { return cached(2, deg); }
const QuadRule& tetrahedron_rule(int deg) { return cached(3, deg); }

const QuadRule& facet_rule(int dim, int deg) { return cached(dim - 1, deg); }
const QuadRule& simplex_rule(int dim, int deg) { return cached(dim, deg); }

}  // namespace eespt
