#include "eespt/polynomial.hpp"

#include <Eigen/Dense>

#include <map>
#include <mutex>

namespace eespt {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

LagrangeBasis::LagrangeBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  const int k = degree;
  // lattice nodes and monomial exponents share the same multi-index set
  if (dim == 2) {
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k - a; ++b) {
        exponents_.push_back({a, b, 0});
        nodes_.push_back({double(a) / k, double(b) / k, 0.0});
      }
  } else {
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k - a; ++b)
        for (int c = 0; c <= k - a - b; ++c) {
          exponents_.push_back({a, b, c});
          nodes_.push_back({double(a) / k, double(b) / k, double(c) / k});
        }
  }
  const int n = size();
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& e = exponents_[j];
      V(i, j) = ipow(nodes_[i][0], e[0]) * ipow(nodes_[i][1], e[1]) * ipow(nodes_[i][2], e[2]);
    }
  Eigen::MatrixXd C = V.inverse();  // phi_i = sum_j C(j,i) m_j
  coeffs_.assign(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) coeffs_[i][j] = C(j, i);
}

void LagrangeBasis::eval(const Vec3& p, std::vector<double>& values) const {
  const int n = size();
  std::vector<double> mono(n);
  for (int j = 0; j < n; ++j) {
    const auto& e = exponents_[j];
    mono[j] = ipow(p[0], e[0]) * ipow(p[1], e[1]) * ipow(p[2], e[2]);
  }
  values.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) values[i] += coeffs_[i][j] * mono[j];
}

void LagrangeBasis::eval_grad(const Vec3& p, std::vector<Vec3>& grads) const {
  const int n = size();
  std::vector<Vec3> dmono(n);
  for (int j = 0; j < n; ++j) {
    const auto& e = exponents_[j];
    double px[3] = {ipow(p[0], e[0]), ipow(p[1], e[1]), ipow(p[2], e[2])};
    Vec3 g{0, 0, 0};
    if (e[0] > 0) g[0] = e[0] * ipow(p[0], e[0] - 1) * px[1] * px[2];
    if (e[1] > 0) g[1] = e[1] * px[0] * ipow(p[1], e[1] - 1) * px[2];
    if (e[2] > 0) g[2] = e[2] * px[0] * px[1] * ipow(p[2], e[2] - 1);
    dmono[j] = g;
  }
  grads.assign(n, Vec3{0, 0, 0});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grads[i] += coeffs_[i][j] * dmono[j];
}

void LagrangeBasis::eval_hess(const Vec3& p, std::vector<std::array<double, 6>>& hess) const {
  const int n = size();
  auto d2 = [&](const std::array<int, 3>& e, int da, int db) {
    std::array<int, 3> f = e;
    double fac = 1.0;
    for (int d : {da, db}) {
      if (f[d] == 0) return 0.0;
      fac *= f[d];
      f[d] -= 1;
    }
    return fac * ipow(p[0], f[0]) * ipow(p[1], f[1]) * ipow(p[2], f[2]);
  };
  hess.assign(n, {0, 0, 0, 0, 0, 0});
  for (int j = 0; j < n; ++j) {
    const auto& e = exponents_[j];
    const double hxx = d2(e, 0, 0), hyy = d2(e, 1, 1), hzz = d2(e, 2, 2);
    const double hyz = d2(e, 1, 2), hxz = d2(e, 0, 2), hxy = d2(e, 0, 1);
    for (int i = 0; i < n; ++i) {
      const double c = coeffs_[i][j];
      hess[i][0] += c * hxx;
      hess[i][1] += c * hyy;
      hess[i][2] += c * hzz;
      hess[i][3] += c * hyz;
      hess[i][4] += c * hxz;
      hess[i][5] += c * hxy;
    }
  }
}

const LagrangeBasis& LagrangeBasis::get(int dim, int degree) {
  static std::map<std::pair<int, int>, LagrangeBasis> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, LagrangeBasis(dim, degree)).first;
  return it->second;
}

}  // namespace eespt
