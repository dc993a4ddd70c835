#include "cellkit/fv/systems.hpp"

#include <algorithm>

#include "cellkit/errors.hpp"

namespace cellkit::fv {

using model::ExternalCondition;

BoundaryProvider constant_boundary(ExternalCondition bc) {
  return [bc](double) { return bc; };
}

FullSystem::FullSystem(const Discretization& disc, BoundaryProvider bc) : disc_(disc), bc_(std::move(bc)) {}

std::size_t FullSystem::size() const { return static_cast<std::size_t>(disc_.size()); }
std::size_t FullSystem::n_differential() const { return static_cast<std::size_t>(disc_.n_cells()); }

void FullSystem::residual(double t, const Vec& y, Vec& f) const {
  f.resize(y.size());
  disc_.residual(y.data(), bc_(t), f.data());
}

void FullSystem::jacobian(double t, const Vec& y, dae::Triplets& out) const {
  disc_.jacobian(y.data(), bc_(t), out);
}

std::vector<int> FullSystem::band_order() const { return disc_.band_order(); }
std::vector<bool> FullSystem::potential_mask() const { return disc_.potential_mask(); }

double FullSystem::flux_functional(double, const Vec& y) const { return disc_.anode_flux(y.data()); }

SubSystem::SubSystem(const Discretization& disc, Block block, BoundaryProvider bc, ForeignProvider foreign)
    : disc_(disc), block_(block), bc_(std::move(bc)), foreign_(std::move(foreign)) {
  if (block == Block::All) throw ConfigError("sub-system needs the electrolyte or the solid block");
  const Grid& g = disc.grid();
  if (block == Block::Electrolyte) {
    for (int i = 0; i < g.n_e; ++i) map_.push_back(disc.ce(i));
    for (int i = 0; i < g.n_e; ++i) map_.push_back(disc.pe(i));
    for (int k = 0; k < 4; ++k) map_.push_back(disc.aux(k));
    n_diff_ = static_cast<std::size_t>(g.n_e);
    foreign_idx_ = {disc.aux(4), disc.aux(5)};
    export_idx_ = {disc.aux(2), disc.aux(3)};
  } else {
    for (int j = 0; j < g.n_s(); ++j) map_.push_back(disc.cs(j));
    for (int j = 0; j < g.n_s(); ++j) map_.push_back(disc.ps(j));
    map_.push_back(disc.aux(4));
    map_.push_back(disc.aux(5));
    n_diff_ = static_cast<std::size_t>(g.n_s());
    foreign_idx_ = {disc.aux(2), disc.aux(3)};
    export_idx_ = {disc.aux(4), disc.aux(5)};
  }
  inv_.assign(static_cast<std::size_t>(disc.size()), -1);
  for (std::size_t k = 0; k < map_.size(); ++k) inv_[static_cast<std::size_t>(map_[k])] = static_cast<int>(k);
  for (int full : disc.band_order()) {
    const int s = inv_[static_cast<std::size_t>(full)];
    if (s >= 0) order_.push_back(s);
  }
  const auto full_mask = disc.potential_mask();
  for (int full : map_) mask_.push_back(full_mask[static_cast<std::size_t>(full)]);
  work_y_ = disc.initial_guess();
  work_f_ = Vec::Zero(disc.size());
}

void SubSystem::embed(double t, const Vec& y) const {
  for (std::size_t k = 0; k < map_.size(); ++k) work_y_[map_[k]] = y[static_cast<Eigen::Index>(k)];
  const auto fv = foreign_(t);
  work_y_[foreign_idx_[0]] = fv[0];
  work_y_[foreign_idx_[1]] = fv[1];
}

void SubSystem::residual(double t, const Vec& y, Vec& f) const {
  embed(t, y);
  disc_.residual(work_y_.data(), bc_(t), work_f_.data(), block_);
  f.resize(static_cast<Eigen::Index>(map_.size()));
  for (std::size_t k = 0; k < map_.size(); ++k) f[static_cast<Eigen::Index>(k)] = work_f_[map_[k]];
}

void SubSystem::jacobian(double t, const Vec& y, dae::Triplets& out) const {
  embed(t, y);
  work_t_.clear();
  disc_.jacobian(work_y_.data(), bc_(t), work_t_, block_);
  for (std::size_t e = 0; e < work_t_.size(); ++e) {
    const int c = inv_[static_cast<std::size_t>(work_t_.col[e])];
    if (c < 0) continue;
    out.add(inv_[static_cast<std::size_t>(work_t_.row[e])], c, work_t_.val[e]);
  }
}

double SubSystem::flux_functional(double t, const Vec& y) const {
  embed(t, y);
  if (block_ == Block::Electrolyte) return disc_.anode_flux(work_y_.data());
  const auto& m = disc_.model();
  return disc_.interface_current(work_y_.data()) / (m.params().faraday * m.scales().molar_flux_e_scale);
}

Vec SubSystem::extract(const Vec& full) const {
  Vec s(static_cast<Eigen::Index>(map_.size()));
  for (std::size_t k = 0; k < map_.size(); ++k) s[static_cast<Eigen::Index>(k)] = full[map_[k]];
  return s;
}

void SubSystem::insert(const Vec& sub, Vec& full) const {
  for (std::size_t k = 0; k < map_.size(); ++k) full[map_[k]] = sub[static_cast<Eigen::Index>(k)];
}

namespace {

// Newton on the algebraic block of any semi-explicit system.
Vec solve_algebraic(const dae::DaeSystem& sys, double t, const Vec& guess, double tol) {
  const auto nd = static_cast<Eigen::Index>(sys.n_differential());
  const auto n = static_cast<Eigen::Index>(sys.size());
  const Eigen::Index na = n - nd;
  Vec y = guess;
  Vec f(n);
  dae::Triplets full, alg;

  auto residual = [&](const Vec& z, Vec& r) {
    y.tail(na) = z;
    sys.residual(t, y, f);
    r = f.tail(na);
  };
  auto jacobian = [&](const Vec& z, dae::SparseMatrix& J) {
    y.tail(na) = z;
    full.clear();
    alg.clear();
    sys.jacobian(t, y, full);
    for (std::size_t e = 0; e < full.size(); ++e) {
      if (full.row[e] < nd || full.col[e] < nd) continue;
      alg.add(full.row[e] - static_cast<int>(nd), full.col[e] - static_cast<int>(nd), full.val[e]);
    }
    if (J.rows() == 0) {
      J = dae::SparseMatrix::from_triplets(static_cast<std::size_t>(na), static_cast<std::size_t>(na), alg);
    } else {
      J.refill(alg);
    }
  };

  std::vector<int> order;
  for (int k : sys.band_order()) {
    if (k >= nd) order.push_back(k - static_cast<int>(nd));
  }
  dae::BandedSolver solver(order);
  dae::NewtonOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = tol;
  opts.step_tol = tol;
  opts.max_iterations = 60;
  // Sinh kinetics make the first steps overshoot before converging.
  opts.line_search = false;
  const auto res = dae::newton_solve(residual, jacobian, guess.tail(na), opts, solver);
  y.tail(na) = res.x;
  return y;
}

}  // namespace

Vec consistent_init(const Discretization& disc, const Vec& guess, const ExternalCondition& bc, double tol) {
  FullSystem sys(disc, constant_boundary(bc));
  return solve_algebraic(sys, 0.0, guess, tol);
}

Vec consistent_init(const SubSystem& sys, double t, const Vec& guess, double tol) {
  return solve_algebraic(sys, t, guess, tol);
}

LithiumInventory lithium_inventory(const Discretization& disc, const Vec& y) {
  const auto& s = disc.model().scales();
  const Grid& g = disc.grid();
  const double h = g.dx * s.length_scale;
  LithiumInventory inv{0.0, 0.0};
  for (int i = 0; i < g.n_e; ++i) inv.electrolyte += y[disc.ce(i)];
  for (int j = 0; j < g.n_am; ++j) inv.solid += y[disc.cs(j)];
  inv.electrolyte *= h * s.conc_e_scale;
  inv.solid *= h * s.conc_s_scale;
  return inv;
}

double anode_flux_to_moles(const Discretization& disc, double integral) {
  const auto& s = disc.model().scales();
  return integral * s.molar_flux_e_scale * s.time_scale;
}

}  // namespace cellkit::fv
