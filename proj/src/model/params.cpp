#include "cellkit/model/params.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cellkit/errors.hpp"

namespace cellkit::model {

PhysicalParameters PhysicalParameters::reference(double conc_solid_max) {
  PhysicalParameters p;
  p.conc_solid_max = conc_solid_max;
  return p;
}

void PhysicalParameters::validate() const {
  std::vector<std::string> bad;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be > 0");
  };
  positive(faraday, "faraday");
  positive(gas_constant, "gas_constant");
  positive(temperature, "temperature");
  positive(len_electrolyte, "len_electrolyte");
  positive(len_active, "len_active");
  positive(len_collector, "len_collector");
  positive(conc_electrolyte_init, "conc_electrolyte_init");
  positive(conc_solid_init, "conc_solid_init");
  positive(conc_solid_max, "conc_solid_max");
  positive(diff_electrolyte, "diff_electrolyte");
  positive(diff_active, "diff_active");
  positive(cond_ionic, "cond_ionic");
  positive(cond_active, "cond_active");
  positive(cond_collector, "cond_collector");
  positive(rate_const_scaled, "rate_const_scaled");
  positive(exch_current_li, "exch_current_li");
  positive(sinh_guard, "sinh_guard");
  if (!(transference > 0.0 && transference < 1.0)) bad.push_back("transference must lie in (0,1)");
  if (!(conc_solid_init < conc_solid_max)) bad.push_back("conc_solid_init must be < conc_solid_max");
  if (anodic_strength != 0.5) bad.push_back("anodic_strength must be 0.5");
  if (!(cond_collector > cond_active)) bad.push_back("cond_collector must exceed cond_active");
  if (!(diff_active < diff_electrolyte)) bad.push_back("diff_active must be < diff_electrolyte");
  if (activity_deriv <= -1.0) bad.push_back("activity_deriv must be > -1");
  if (ref_current_override && !(*ref_current_override > 0.0))
    bad.push_back("ref_current_override must be > 0");
  if (bad.empty()) return;
  std::ostringstream os;
  os << "invalid physical parameters:";
  for (const auto& b : bad) os << "\n  " << b;
  throw ConfigError(os.str());
}

CharacteristicScales compute_scales(const PhysicalParameters& p) {
  CharacteristicScales s{};
  s.potential_scale = p.gas_constant * p.temperature / p.faraday;
  s.length_scale = p.length();
  s.time_scale = s.length_scale * s.length_scale / p.diff_electrolyte;
  s.conc_e_scale = p.conc_electrolyte_init;
  s.conc_s_scale = p.conc_solid_max;
  s.molar_flux_e_scale = p.diff_electrolyte * s.conc_e_scale / s.length_scale;
  s.molar_flux_s_scale = p.diff_active * s.conc_s_scale / s.length_scale;
  s.current_e_scale = p.cond_ionic * s.potential_scale / s.length_scale;
  s.current_s_scale = p.cond_active * s.potential_scale / s.length_scale;
  s.bv_current_scale = 1.0;
  return s;
}

DimensionlessGroups compute_groups(const PhysicalParameters& p, const CharacteristicScales& s) {
  DimensionlessGroups g{};
  const double tm = 1.0 - p.transference;
  g.kappa_d = 2.0 * tm * (1.0 + p.activity_deriv);
  g.eps_diff = p.diff_active / p.diff_electrolyte;
  g.eps_cond = p.cond_active / p.cond_collector;
  g.peclet = s.current_e_scale * p.transference / (s.molar_flux_e_scale * p.faraday);
  g.zeta_e_c = tm / (p.faraday * s.molar_flux_e_scale);
  g.zeta_s_c = 1.0 / (p.faraday * s.molar_flux_s_scale);
  g.zeta_s_phi = 1.0 / s.current_s_scale;
  g.zeta_e_phi_const = 1.0 / s.current_e_scale;
  g.zeta_e_phi_inv = g.kappa_d * tm / (p.faraday * s.molar_flux_e_scale);
  return g;
}

double reference_current(const PhysicalParameters& p) {
  if (p.ref_current_override) return *p.ref_current_override;
  return p.faraday * p.len_active * p.conc_solid_max / 3600.0;
}

Model::Model(PhysicalParameters params) : p_(std::move(params)) {
  p_.validate();
  s_ = compute_scales(p_);
  g_ = compute_groups(p_, s_);
  i_1c_ = model::reference_current(p_);
  cathode_prefactor_ =
      2.0 * p_.rate_const_scaled * std::sqrt(s_.conc_e_scale) * s_.conc_s_scale / s_.bv_current_scale;
}

namespace {

void guard(double arg, double bound, const char* where) {
  if (!(std::abs(arg) <= bound)) {
    std::ostringstream os;
    os << where << ": kinetic sinh argument " << arg << " exceeds bound " << bound;
    throw DomainError(os.str());
  }
}

}  // namespace

AnodeCurrent Model::bv_anode(double phi_e) const {
  const double arg = -0.5 * phi_e;
  guard(arg, p_.sinh_guard, "bv_anode");
  const double k = 2.0 * p_.exch_current_li / s_.bv_current_scale;
  return {k * std::sinh(arg), -0.5 * k * std::cosh(arg)};
}

Dual Model::ocp_scaled(double c_s) const {
  const Dual u = p_.ocp.evaluate(c_s);
  return {u.value / s_.potential_scale, u.deriv / s_.potential_scale};
}

CathodeCurrent Model::bv_cathode(double c_e, double phi_e, double c_s, double phi_s) const {
  if (!(c_e > 0.0)) throw DomainError("bv_cathode: electrolyte concentration " + std::to_string(c_e) + " <= 0");
  if (!(c_s > 0.0 && c_s < 1.0))
    throw DomainError("bv_cathode: solid stoichiometry " + std::to_string(c_s) + " outside (0,1)");
  const Dual u0 = ocp_scaled(c_s);
  const double arg = 0.5 * (phi_s - phi_e - u0.value);
  guard(arg, p_.sinh_guard, "bv_cathode");
  const double q = c_s * (1.0 - c_s);
  const double root = std::sqrt(c_e * q);
  const double sh = std::sinh(arg), ch = std::cosh(arg);
  CathodeCurrent r{};
  r.i = cathode_prefactor_ * root * sh;
  const double dphi = 0.5 * cathode_prefactor_ * root * ch;
  r.di_dphi_s = dphi;
  r.di_dphi_e = -dphi;
  r.di_dce = 0.5 * r.i / c_e;
  r.di_dcs = cathode_prefactor_ * std::sqrt(c_e) * (1.0 - 2.0 * c_s) / (2.0 * std::sqrt(q)) * sh - dphi * u0.deriv;
  return r;
}

}  // namespace cellkit::model
