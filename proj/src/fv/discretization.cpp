#include "cellkit/fv/discretization.hpp"

#include <cmath>
#include <sstream>

#include "cellkit/errors.hpp"
#include "cellkit/simd/kernels.hpp"

namespace cellkit::fv {

using model::ExternalCondition;

Discretization::Discretization(model::Model model, Grid grid)
    : model_(std::move(model)), grid_(grid), ne_(grid.n_e), nam_(grid.n_am), ncc_(grid.n_cc) {
  ns_ = nam_ + ncc_;
  n_ = ne_ + ns_;
  dx_ = grid_.dx;
  inv_dx_ = 1.0 / dx_;
  const auto& s = model_.scales();
  const double F = model_.params().faraday;
  k_ne_ = 1.0 / (F * s.molar_flux_e_scale);
  k_ie_ = 1.0 / s.current_e_scale;
  k_ns_ = 1.0 / (F * s.molar_flux_s_scale);
  k_is_ = 1.0 / s.current_s_scale;
  const double eps = model_.groups().eps_cond;
  inv_eps_ = 1.0 / eps;
  sigma_h_ = 2.0 / (1.0 + eps);
}

namespace {

struct Scratch {
  std::vector<double> n_e, i_e, n_s, i_s;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

void Discretization::residual(const double* y, const ExternalCondition& bc, double* f, Block block) const {
  const auto& g = model_.groups();
  const auto& K = simd::active();
  const double* a = y + aux(0);
  const double h2 = 2.0 * inv_dx_;  // 1 / (dx/2)
  const auto C = model_.bv_cathode(a[2], a[3], a[4], a[5]);
  auto& sc = scratch();

  if (block != Block::Solid) {
    const double* c = y + ce(0);
    const double* phi = y + pe(0);
    for (int i = 0; i < ne_; ++i) {
      if (!(c[i] > 0.0)) {
        std::ostringstream os;
        os << "electrolyte concentration " << c[i] << " <= 0 in cell " << i;
        throw DomainError(os.str());
      }
    }
    const auto A = model_.bv_anode(a[1]);
    sc.n_e.resize(ne_ + 1);
    sc.i_e.resize(ne_ + 1);
    sc.n_e[0] = A.i * k_ne_;
    sc.i_e[0] = A.i * k_ie_;
    K.electrolyte_faces(c, phi, static_cast<std::size_t>(ne_), inv_dx_, g.kappa_d, g.peclet, sc.n_e.data() + 1,
                        sc.i_e.data() + 1);
    sc.n_e[ne_] = -C.i * k_ne_;
    sc.i_e[ne_] = -C.i * k_ie_;
    K.divergence(sc.n_e.data(), static_cast<std::size_t>(ne_), inv_dx_, f + ce(0));
    K.divergence(sc.i_e.data(), static_cast<std::size_t>(ne_), inv_dx_, f + pe(0));
    f[aux(0)] = (c[0] - a[0]) * h2 + g.zeta_e_c * A.i;
    f[aux(1)] = (phi[0] - a[1]) * h2 + g.zeta_e_phi(a[0]) * A.i;
    f[aux(2)] = (a[2] - c[ne_ - 1]) * h2 - g.zeta_e_c * C.i;
    f[aux(3)] = (a[3] - phi[ne_ - 1]) * h2 - g.zeta_e_phi(a[2]) * C.i;
  }

  if (block != Block::Electrolyte) {
    const double* c = y + cs(0);
    const double* phi = y + ps(0);
    sc.n_s.assign(ns_ + 1, 0.0);
    sc.i_s.resize(ns_ + 1);
    sc.n_s[0] = -C.i * k_ns_;
    sc.i_s[0] = -C.i * k_is_;
    for (int fa = 1; fa < nam_; ++fa) {
      sc.n_s[fa] = -(c[fa] - c[fa - 1]) * inv_dx_;
      sc.i_s[fa] = -(phi[fa] - phi[fa - 1]) * inv_dx_;
    }
    sc.i_s[nam_] = -sigma_h_ * (phi[nam_] - phi[nam_ - 1]) * inv_dx_;
    for (int fa = nam_ + 1; fa < ns_; ++fa) sc.i_s[fa] = -inv_eps_ * (phi[fa] - phi[fa - 1]) * inv_dx_;
    if (bc.kind == ExternalCondition::Kind::Current) {
      sc.i_s[ns_] = bc.value;
    } else {
      sc.i_s[ns_] = -inv_eps_ * (bc.value - phi[ns_ - 1]) * h2;
    }
    K.divergence(sc.n_s.data(), static_cast<std::size_t>(ns_), g.eps_diff * inv_dx_, f + cs(0));
    K.divergence(sc.i_s.data(), static_cast<std::size_t>(ns_), inv_dx_, f + ps(0));
    f[aux(4)] = (c[0] - a[4]) * h2 - g.zeta_s_c * C.i;
    f[aux(5)] = (phi[0] - a[5]) * h2 - g.zeta_s_phi * C.i;
  }
}

void Discretization::jacobian(const double* y, const ExternalCondition& bc, dae::Triplets& out, Block block) const {
  (void)bc;
  const auto& g = model_.groups();
  const double* a = y + aux(0);
  const double h2 = 2.0 * inv_dx_;
  const auto C = model_.bv_cathode(a[2], a[3], a[4], a[5]);
  const int ax[4] = {aux(2), aux(3), aux(4), aux(5)};
  const double dC[4] = {C.di_dce, C.di_dphi_e, C.di_dcs, C.di_dphi_s};

  // Face f of a phase with `cells` cells: contributes -d/dx to the cell on its
  // left (f-1) and +d/dx to the cell on its right (f).
  auto face = [&](int f, int cells, int row_base, double scale, int var, double d) {
    if (f - 1 >= 0) out.add(row_base + f - 1, var, -scale * d);
    if (f < cells) out.add(row_base + f, var, scale * d);
  };

  if (block != Block::Solid) {
    const double* c = y + ce(0);
    const auto A = model_.bv_anode(a[1]);
    const int rF = ce(0), rG = pe(0);
    face(0, ne_, rF, inv_dx_, aux(1), A.di_dphi_e * k_ne_);
    face(0, ne_, rG, inv_dx_, aux(1), A.di_dphi_e * k_ie_);
    for (int f = 1; f < ne_; ++f) {
      const int l = f - 1, r = f;
      const double gc = (c[r] - c[l]) * inv_dx_;
      const double cm = 0.5 * (c[l] + c[r]);
      const double di_dcl = g.kappa_d * (-inv_dx_ / cm - 0.5 * gc / (cm * cm));
      const double di_dcr = g.kappa_d * (inv_dx_ / cm - 0.5 * gc / (cm * cm));
      const double di_dpl = inv_dx_, di_dpr = -inv_dx_;
      face(f, ne_, rF, inv_dx_, ce(l), inv_dx_ + g.peclet * di_dcl);
      face(f, ne_, rF, inv_dx_, ce(r), -inv_dx_ + g.peclet * di_dcr);
      face(f, ne_, rF, inv_dx_, pe(l), g.peclet * di_dpl);
      face(f, ne_, rF, inv_dx_, pe(r), g.peclet * di_dpr);
      face(f, ne_, rG, inv_dx_, ce(l), di_dcl);
      face(f, ne_, rG, inv_dx_, ce(r), di_dcr);
      face(f, ne_, rG, inv_dx_, pe(l), di_dpl);
      face(f, ne_, rG, inv_dx_, pe(r), di_dpr);
    }
    for (int k = 0; k < 4; ++k) {
      face(ne_, ne_, rF, inv_dx_, ax[k], -dC[k] * k_ne_);
      face(ne_, ne_, rG, inv_dx_, ax[k], -dC[k] * k_ie_);
    }
    // auxiliary rows at the anode
    out.add(aux(0), ce(0), h2);
    out.add(aux(0), aux(0), -h2);
    out.add(aux(0), aux(1), g.zeta_e_c * A.di_dphi_e);
    out.add(aux(1), pe(0), h2);
    out.add(aux(1), aux(0), -g.zeta_e_phi_inv / (a[0] * a[0]) * A.i);
    out.add(aux(1), aux(1), -h2 + g.zeta_e_phi(a[0]) * A.di_dphi_e);
    // electrolyte-side rows at the cathode interface
    out.add(aux(2), ce(ne_ - 1), -h2);
    out.add(aux(3), pe(ne_ - 1), -h2);
    const double zp = g.zeta_e_phi(a[2]);
    for (int k = 0; k < 4; ++k) {
      out.add(aux(2), ax[k], (k == 0 ? h2 : 0.0) - g.zeta_e_c * dC[k]);
      double v = (k == 1 ? h2 : 0.0) - zp * dC[k];
      if (k == 0) v += g.zeta_e_phi_inv / (a[2] * a[2]) * C.i;
      out.add(aux(3), ax[k], v);
    }
  }

  if (block != Block::Electrolyte) {
    const int rF = cs(0), rG = ps(0);
    const double sF = g.eps_diff * inv_dx_;
    for (int k = 0; k < 4; ++k) {
      face(0, ns_, rF, sF, ax[k], -dC[k] * k_ns_);
      face(0, ns_, rG, inv_dx_, ax[k], -dC[k] * k_is_);
    }
    for (int f = 1; f < nam_; ++f) {
      face(f, ns_, rF, sF, cs(f - 1), inv_dx_);
      face(f, ns_, rF, sF, cs(f), -inv_dx_);
      face(f, ns_, rG, inv_dx_, ps(f - 1), inv_dx_);
      face(f, ns_, rG, inv_dx_, ps(f), -inv_dx_);
    }
    face(nam_, ns_, rG, inv_dx_, ps(nam_ - 1), sigma_h_ * inv_dx_);
    face(nam_, ns_, rG, inv_dx_, ps(nam_), -sigma_h_ * inv_dx_);
    for (int f = nam_ + 1; f < ns_; ++f) {
      face(f, ns_, rG, inv_dx_, ps(f - 1), inv_eps_ * inv_dx_);
      face(f, ns_, rG, inv_dx_, ps(f), -inv_eps_ * inv_dx_);
    }
    const double dI = bc.kind == ExternalCondition::Kind::Potential ? inv_eps_ * h2 : 0.0;
    face(ns_, ns_, rG, inv_dx_, ps(ns_ - 1), dI);
    // collector cells keep a (zero) diagonal so the pattern has every W row
    for (int j = nam_; j < ns_; ++j) out.add(cs(j), cs(j), 0.0);
    out.add(aux(4), cs(0), h2);
    out.add(aux(5), ps(0), h2);
    for (int k = 0; k < 4; ++k) {
      out.add(aux(4), ax[k], (k == 2 ? -h2 : 0.0) - g.zeta_s_c * dC[k]);
      out.add(aux(5), ax[k], (k == 3 ? -h2 : 0.0) - g.zeta_s_phi * dC[k]);
    }
  }
}

Vec Discretization::assemble_F(const Vec& y, const ExternalCondition& bc) const {
  Vec f(size());
  residual(y.data(), bc, f.data());
  return f.head(n_);
}

Vec Discretization::assemble_G(const Vec& y, const ExternalCondition& bc) const {
  Vec f(size());
  residual(y.data(), bc, f.data());
  return f.tail(n_ + kAux);
}

double Discretization::anode_flux(const double* y) const { return model_.bv_anode(y[aux(1)]).i * k_ne_; }

double Discretization::interface_current(const double* y) const {
  const double* a = y + aux(0);
  return model_.bv_cathode(a[2], a[3], a[4], a[5]).i;
}

double Discretization::cell_voltage(const double* y, const ExternalCondition& bc) const {
  if (bc.kind == ExternalCondition::Kind::Potential) return bc.value;
  return y[ps(ns_ - 1)] - model_.groups().eps_cond * bc.value * 0.5 * dx_;
}

Discretization::Fluxes Discretization::fluxes(const double* y, const ExternalCondition& bc) const {
  Vec f(size());
  residual(y, bc, f.data());
  const auto& sc = scratch();
  return {sc.n_e, sc.i_e, sc.n_s, sc.i_s};
}

std::vector<int> Discretization::band_order() const {
  std::vector<int> o;
  o.reserve(static_cast<std::size_t>(size()));
  o.push_back(aux(0));
  o.push_back(aux(1));
  for (int i = 0; i < ne_; ++i) {
    o.push_back(ce(i));
    o.push_back(pe(i));
  }
  for (int k = 2; k < kAux; ++k) o.push_back(aux(k));
  for (int j = 0; j < ns_; ++j) {
    o.push_back(cs(j));
    o.push_back(ps(j));
  }
  return o;
}

std::vector<bool> Discretization::potential_mask() const {
  std::vector<bool> m(static_cast<std::size_t>(size()), false);
  for (int k = n_; k < 2 * n_; ++k) m[static_cast<std::size_t>(k)] = true;
  m[static_cast<std::size_t>(aux(1))] = m[static_cast<std::size_t>(aux(3))] = m[static_cast<std::size_t>(aux(5))] = true;
  return m;
}

Vec Discretization::initial_guess() const {
  const auto& p = model_.params();
  const double cs0 = p.conc_solid_init / p.conc_solid_max;
  const double u0 = model_.ocp_scaled(cs0).value;
  Vec y = Vec::Zero(size());
  for (int i = 0; i < ne_; ++i) y[ce(i)] = 1.0;
  for (int j = 0; j < ns_; ++j) {
    y[cs(j)] = cs0;
    y[ps(j)] = u0;
  }
  y[aux(0)] = 1.0;
  y[aux(1)] = 0.0;
  y[aux(2)] = 1.0;
  y[aux(3)] = 0.0;
  y[aux(4)] = cs0;
  y[aux(5)] = u0;
  return y;
}

}  // namespace cellkit::fv
