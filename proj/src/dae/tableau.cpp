#include "cellkit/dae/tableau.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cellkit/errors.hpp"

namespace cellkit::dae {

std::complex<double> IRKScheme::stability(std::complex<double> z) const {
  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  const CMat m = CMat::Identity(stages, stages) - z * a.cast<std::complex<double>>();
  const CVec ones = CVec::Ones(stages);
  const CVec x = m.partialPivLu().solve(ones);
  return 1.0 + z * (b.cast<std::complex<double>>().transpose() * x)(0);
}

void IRKScheme::validate() const {
  if (stages < 1 || a.rows() != stages || a.cols() != stages || b.size() != stages || c.size() != stages)
    throw Error("tableau: inconsistent dimensions");
  for (int i = 0; i < stages; ++i) {
    if (std::abs(a.row(i).sum() - c[i]) > 1e-13) throw Error("tableau: row sums must equal nodes");
  }
  if (stiffly_accurate && (a.row(stages - 1).transpose() - b).cwiseAbs().maxCoeff() > 1e-13)
    throw Error("tableau: stiffly accurate scheme needs last row of A equal to b");
}

IRKScheme implicit_euler() {
  IRKScheme s;
  s.name = "implicit_euler";
  s.stages = 1;
  s.a = Mat::Constant(1, 1, 1.0);
  s.b = Vec::Constant(1, 1.0);
  s.c = Vec::Constant(1, 1.0);
  s.classical_order = 1;
  s.stiffly_accurate = true;
  return s;
}

namespace {

// Polynomial coefficients, lowest degree first.
using Poly = std::vector<long double>;

Poly multiply(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, 0.0L);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

Poly derivative(const Poly& p) {
  Poly d(p.size() > 1 ? p.size() - 1 : 1, 0.0L);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<long double>(i) * p[i];
  return d;
}

long double eval(const Poly& p, long double x) {
  long double v = 0.0L;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

// Right Radau nodes: zeros of d^{s-1}/dx^{s-1} [x^{s-1} (x-1)^s].
std::vector<double> radau_nodes(int s) {
  Poly p{1.0L};
  for (int k = 0; k < s - 1; ++k) p = multiply(p, {0.0L, 1.0L});
  for (int k = 0; k < s; ++k) p = multiply(p, {-1.0L, 1.0L});
  for (int k = 0; k < s - 1; ++k) p = derivative(p);
  const int deg = static_cast<int>(p.size()) - 1;
  Mat comp = Mat::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -static_cast<double>(p[i] / p[deg]);
  Eigen::EigenSolver<Mat> es(comp);
  std::vector<double> nodes;
  const Poly dp = derivative(p);
  for (int i = 0; i < deg; ++i) {
    long double x = es.eigenvalues()[i].real();
    for (int it = 0; it < 20; ++it) x -= eval(p, x) / eval(dp, x);
    nodes.push_back(static_cast<double>(x));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.back() = 1.0;
  return nodes;
}

}  // namespace

IRKScheme radau_iia(int stages) {
  if (stages < 1) throw Error("radau_iia: need at least one stage");
  if (stages == 1) {
    IRKScheme s = implicit_euler();
    s.name = "radau_iia1";
    return s;
  }
  const int s = stages;
  const std::vector<double> nodes = radau_nodes(s);
  IRKScheme sch;
  sch.name = "radau_iia" + std::to_string(s);
  sch.stages = s;
  sch.c = Vec(s);
  for (int i = 0; i < s; ++i) sch.c[i] = nodes[i];

  // Collocation: sum_j a_ij c_j^{k-1} = c_i^k / k, sum_j b_j c_j^{k-1} = 1/k.
  Mat v(s, s);
  for (int k = 0; k < s; ++k)
    for (int j = 0; j < s; ++j) v(k, j) = std::pow(sch.c[j], k);
  const Eigen::PartialPivLU<Mat> vlu(v);
  sch.a = Mat(s, s);
  for (int i = 0; i < s; ++i) {
    Vec rhs(s);
    for (int k = 0; k < s; ++k) rhs[k] = std::pow(sch.c[i], k + 1) / (k + 1);
    sch.a.row(i) = vlu.solve(rhs).transpose();
  }
  Vec rb(s);
  for (int k = 0; k < s; ++k) rb[k] = 1.0 / (k + 1);
  sch.b = vlu.solve(rb);
  sch.classical_order = 2 * s - 1;
  sch.stiffly_accurate = true;

  // Embedded estimate: the real eigenvalue of A, then bhat of order s.
  Eigen::EigenSolver<Mat> es(sch.a);
  double gamma0 = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) < best) {
      best = std::abs(ev.imag());
      gamma0 = ev.real();
    }
  }
  if (s % 2 == 1) {
    Vec rh = rb;
    rh[0] -= gamma0;
    const Vec bhat = vlu.solve(rh);
    sch.gamma0 = gamma0;
    sch.e = sch.a.transpose().partialPivLu().solve(bhat - sch.b);
    sch.has_embedded = true;
  }
  sch.validate();
  return sch;
}

IRKScheme scheme_by_name(const std::string& name) {
  if (name == "implicit_euler") return implicit_euler();
  if (name == "radau_iia3") return radau_iia(3);
  throw ConfigError("unknown scheme '" + name + "' (expected implicit_euler or radau_iia3)");
}

}  // namespace cellkit::dae
