#pragma once

#include <array>
#include <functional>
#include <vector>

#include "cellkit/dae/integrator.hpp"
#include "cellkit/fv/discretization.hpp"

namespace cellkit::fv {

/// Collector condition as a function of dimensionless time.
using BoundaryProvider = std::function<model::ExternalCondition(double t)>;
/// Values of the two interface unknowns owned by the other domain.
using ForeignProvider = std::function<std::array<double, 2>(double t)>;

BoundaryProvider constant_boundary(model::ExternalCondition bc);

/// The whole cell as one DAE.
class FullSystem final : public dae::DaeSystem {
 public:
  FullSystem(const Discretization& disc, BoundaryProvider bc);

  std::size_t size() const override;
  std::size_t n_differential() const override;
  void residual(double t, const Vec& y, Vec& f) const override;
  void jacobian(double t, const Vec& y, dae::Triplets& out) const override;
  std::vector<int> band_order() const override;
  std::vector<bool> potential_mask() const override;
  /// Dimensionless molar flux entering the electrolyte at the anode.
  double flux_functional(double t, const Vec& y) const override;

  const Discretization& discretization() const { return disc_; }
  model::ExternalCondition boundary(double t) const { return bc_(t); }

 private:
  const Discretization& disc_;
  BoundaryProvider bc_;
};

/// One domain with the other domain's interface values supplied from outside.
///   electrolyte: y = [c_e; phi_e; c_e0+, phi_e0+, c_e-1-, phi_e-1-], foreign = (c_s0+, phi_s0+)
///   solid:       y = [c_s; phi_s; c_s0+, phi_s0+],                  foreign = (c_e-1-, phi_e-1-)
class SubSystem final : public dae::DaeSystem {
 public:
  SubSystem(const Discretization& disc, Block block, BoundaryProvider bc, ForeignProvider foreign);

  std::size_t size() const override { return map_.size(); }
  std::size_t n_differential() const override { return n_diff_; }
  void residual(double t, const Vec& y, Vec& f) const override;
  void jacobian(double t, const Vec& y, dae::Triplets& out) const override;
  std::vector<int> band_order() const override { return order_; }
  std::vector<bool> potential_mask() const override { return mask_; }
  double flux_functional(double t, const Vec& y) const override;

  Block block() const { return block_; }
  /// Full-vector indices of the sub unknowns, in sub order.
  const std::vector<int>& map() const { return map_; }
  /// Full-vector indices of the two foreign unknowns.
  std::array<int, 2> foreign_indices() const { return foreign_idx_; }
  /// Full-vector indices of the two interface unknowns this domain hands over.
  std::array<int, 2> export_indices() const { return export_idx_; }

  Vec extract(const Vec& full) const;
  void insert(const Vec& sub, Vec& full) const;

  void set_foreign(ForeignProvider foreign) { foreign_ = std::move(foreign); }

 private:
  void embed(double t, const Vec& y) const;

  const Discretization& disc_;
  Block block_;
  BoundaryProvider bc_;
  ForeignProvider foreign_;
  std::vector<int> map_;
  std::vector<int> inv_;  // full index -> sub index or -1
  std::size_t n_diff_ = 0;
  std::array<int, 2> foreign_idx_{};
  std::array<int, 2> export_idx_{};
  std::vector<int> order_;
  std::vector<bool> mask_;
  mutable Vec work_y_, work_f_;
  mutable dae::Triplets work_t_;
};

/// Solves G(W, Z) = 0 for Z with W held, starting from the Z part of `guess`.
Vec consistent_init(const Discretization& disc, const Vec& guess, const model::ExternalCondition& bc,
                    double tol = 1e-12);

/// Same for a sub-system given the foreign values at time t.
Vec consistent_init(const SubSystem& sys, double t, const Vec& guess, double tol = 1e-12);

/// Lithium inventory per unit area in mol/m^2: electrolyte cells plus active
/// material cells (the collector carries no lithium).
struct LithiumInventory {
  double electrolyte;
  double solid;
  double total() const { return electrolyte + solid; }
};
LithiumInventory lithium_inventory(const Discretization& disc, const Vec& y);

/// Converts a time integral of the dimensionless anode flux into mol/m^2.
double anode_flux_to_moles(const Discretization& disc, double integral);

}  // namespace cellkit::fv
