#pragma once

#include <vector>

#include "cellkit/dae/linalg.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/model/mode.hpp"

namespace cellkit::fv {

using dae::Mat;
using dae::Vec;

/// Which residual rows to evaluate.  Electrolyte rows are the electrolyte cells
/// plus the four electrolyte auxiliary equations; solid rows are the solid cells
/// plus the two solid auxiliary equations.
enum class Block { All, Electrolyte, Solid };

/// Number of auxiliary interface unknowns.
inline constexpr int kAux = 6;

/// Finite-volume semi-discretization.  The unknown vector is y = [w; z] with
///   w = (c_e[0..n_e), c_s[0..n_s))
///   z = (phi_e[0..n_e), phi_s[0..n_s), c_e0+, phi_e0+, c_e-1-, phi_e-1-, c_s0+, phi_s0+)
/// and the residual f = [F; G] uses the same ordering: row k is the equation
/// attached to unknown k.
class Discretization {
 public:
  Discretization(model::Model model, Grid grid);

  const model::Model& model() const { return model_; }
  const Grid& grid() const { return grid_; }

  int n_cells() const { return n_; }
  int size() const { return 2 * n_ + kAux; }
  int ce(int i) const { return i; }
  int cs(int j) const { return ne_ + j; }
  int pe(int i) const { return n_ + i; }
  int ps(int j) const { return n_ + ne_ + j; }
  int aux(int k) const { return 2 * n_ + k; }

  void residual(const double* y, const model::ExternalCondition& bc, double* f, Block block = Block::All) const;
  /// Entries of d f / d y for the rows of `block`; the entry sequence depends
  /// only on the grid and the block.
  void jacobian(const double* y, const model::ExternalCondition& bc, dae::Triplets& out,
                Block block = Block::All) const;

  Vec assemble_F(const Vec& y, const model::ExternalCondition& bc) const;
  Vec assemble_G(const Vec& y, const model::ExternalCondition& bc) const;

  /// Dimensionless molar flux entering the electrolyte at the metal anode.
  double anode_flux(const double* y) const;
  /// Cathode reaction current in A/m^2 evaluated on the auxiliary unknowns.
  double interface_current(const double* y) const;
  /// Dimensionless solid potential at the collector end.
  double cell_voltage(const double* y, const model::ExternalCondition& bc) const;

  /// Face fluxes (molar, current) in each phase, dimensionless.
  struct Fluxes {
    std::vector<double> n_e, i_e, n_s, i_s;
  };
  Fluxes fluxes(const double* y, const model::ExternalCondition& bc) const;

  /// Interleaved ordering that makes the Jacobian banded.
  std::vector<int> band_order() const;
  std::vector<bool> potential_mask() const;

  /// Uniform initial concentrations with potentials and auxiliaries set to
  /// their natural first guess (phi_e = 0, phi_s = U0 at the initial stoichiometry).
  Vec initial_guess() const;

 private:
  model::Model model_;
  Grid grid_;
  int ne_, nam_, ncc_, ns_, n_;
  double dx_, inv_dx_;
  double k_ne_, k_ie_, k_ns_, k_is_;
  double sigma_h_, inv_eps_;
};

}  // namespace cellkit::fv
