#include "dimerlab/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "dimerlab/error.hpp"
#include "dimerlab/kernels.hpp"

namespace dimerlab {

namespace {

constexpr std::size_t max_antisymmetrized_electrons = 4;

LinearOperator kinetic_plus_potential(std::shared_ptr<const TensorSpace> space,
                                      std::shared_ptr<const std::vector<double>> potential, double h,
                                      std::string description) {
  const double inv_h2 = 1.0 / (h * h);
  return {space->dim(),
          [space, potential, inv_h2](std::span<const double> x, std::span<double> y) {
            kernels::apply_hamiltonian(space->extents(), inv_h2, *potential, x, y);
          },
          true, std::move(description)};
}

int parity(std::span<const std::size_t> perm) {
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

void validate_atom(const AtomSpec& spec, int electrons) {
  if (spec.charge < 0.0) throw ConfigError("nuclear charge must be non-negative");
  if (electrons < 0) throw ConfigError("electron count must be non-negative");
  if (spec.mode == DimensionMode::soft_coulomb_1d && !(spec.softening > 0.0))
    throw ConfigError("soft-Coulomb softening must be positive");
  if (spec.mode == DimensionMode::radial_3d && electrons > 1)
    throw ConfigError("3D radial mode supports exactly one electron");
  if (static_cast<std::size_t>(electrons) > max_antisymmetrized_electrons)
    throw ConfigError("at most 4 electrons per atom are supported");
}

}  // namespace

std::string to_string(DimensionMode mode) {
  return mode == DimensionMode::soft_coulomb_1d ? "soft_coulomb_1d" : "radial_3d";
}

std::string to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::full: return "full";
    case CouplingMode::dipole_truncated: return "dipole_truncated";
    case CouplingMode::decoupled: return "decoupled";
  }
  return "?";
}

DimensionMode parse_dimension_mode(const std::string& text) {
  if (text == "soft_coulomb_1d" || text == "1d") return DimensionMode::soft_coulomb_1d;
  if (text == "radial_3d" || text == "3d") return DimensionMode::radial_3d;
  throw ConfigError("unknown dimension mode '" + text + "' (soft_coulomb_1d | radial_3d)");
}

CouplingMode parse_coupling_mode(const std::string& text) {
  if (text == "full") return CouplingMode::full;
  if (text == "dipole_truncated" || text == "dipole") return CouplingMode::dipole_truncated;
  if (text == "decoupled") return CouplingMode::decoupled;
  throw ConfigError("unknown coupling mode '" + text + "' (full | dipole_truncated | decoupled)");
}

double QuantumState::norm() const { return std::sqrt(kernels::dot(coefficients, coefficients)); }

double QuantumState::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw ValidityError("cannot normalize the zero state");
  kernels::scale(1.0 / n, coefficients);
  return n;
}

Hamiltonian ion_hamiltonian(const AtomSpec& spec, int charge, const Grid& grid) {
  if (charge > spec.electrons) {
    std::ostringstream msg;
    msg << "ion charge " << charge << " exceeds the electron count " << spec.electrons;
    throw ConfigError(msg.str());
  }
  const int electrons = spec.electrons - charge;
  validate_atom(spec, electrons);

  const Axis axis = spec.mode == DimensionMode::radial_3d ? grid.radial_axis() : grid.axis();
  auto space = std::make_shared<const TensorSpace>(
      std::vector<Axis>(static_cast<std::size_t>(electrons), axis));
  const std::size_t rank = space->rank();
  auto potential = std::make_shared<std::vector<double>>(space->dim(), 0.0);

  std::vector<std::size_t> index(rank);
  std::vector<double> z(rank);
  for (std::size_t i = 0; i < space->dim(); ++i) {
    space->unravel(i, index);
    for (std::size_t k = 0; k < rank; ++k) z[k] = axis[index[k]];
    double v = 0.0;
    if (spec.mode == DimensionMode::radial_3d) {
      for (std::size_t k = 0; k < rank; ++k) v -= spec.charge / z[k];
    } else {
      for (std::size_t k = 0; k < rank; ++k) v -= spec.charge / soft_distance(z[k], spec.softening);
      for (std::size_t k = 0; k < rank; ++k)
        for (std::size_t l = k + 1; l < rank; ++l) v += 1.0 / soft_distance(z[k] - z[l], spec.softening);
    }
    (*potential)[i] = v;
  }

  std::ostringstream desc;
  desc << "H_atom(Z=" << spec.charge << ",N=" << electrons << "," << to_string(spec.mode) << ")";
  auto op = kinetic_plus_potential(space, potential, grid.spacing(), desc.str());
  return {space, *potential, std::move(op)};
}

Hamiltonian atom_hamiltonian(const AtomSpec& spec, const Grid& grid) {
  if (spec.electrons < 1) throw ConfigError("an atom needs at least one electron");
  return ion_hamiltonian(spec, 0, grid);
}

std::vector<double> permute(const TensorSpace& space, std::span<const std::size_t> pi,
                            std::span<const double> psi) {
  const std::size_t rank = space.rank();
  std::vector<std::size_t> inverse(rank);
  for (std::size_t k = 0; k < rank; ++k) inverse[pi[k]] = k;
  std::vector<double> out(space.dim());
  std::vector<std::size_t> index(rank), source(rank);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    space.unravel(i, index);
    for (std::size_t k = 0; k < rank; ++k) source[k] = index[inverse[k]];
    out[i] = psi[space.ravel(source)];
  }
  return out;
}

LinearOperator antisymmetrizer(std::shared_ptr<const TensorSpace> space,
                               std::vector<std::vector<std::size_t>> groups) {
  groups.erase(std::remove_if(groups.begin(), groups.end(), [](const auto& g) { return g.size() < 2; }),
               groups.end());
  for (const auto& g : groups) {
    if (g.size() > max_antisymmetrized_electrons)
      throw ConfigError("antisymmetrizer supports at most 4 electrons per group");
    for (auto k : g) {
      if (k >= space->rank()) throw ConfigError("antisymmetrizer axis out of range");
      if (!(space->axis(k) == space->axis(g.front())))
        throw ConfigError("antisymmetrized electrons must share one axis");
    }
  }
  if (groups.empty()) return identity_operator(space->dim());

  if (groups.size() == 1 && groups.front().size() == 2) {
    const auto a = groups.front()[0], b = groups.front()[1];
    return {space->dim(),
            [space, a, b](std::span<const double> x, std::span<double> y) {
              kernels::antisymmetrize_pair(space->extents(), a, b, x, y);
            },
            true, "Q"};
  }

  // Signed permutation tables for every group, applied one after another.
  struct SignedPerm {
    std::vector<std::size_t> perm;
    int sign;
  };
  std::vector<std::vector<SignedPerm>> tables;
  for (const auto& g : groups) {
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<SignedPerm> table;
    do {
      std::vector<std::size_t> full(space->rank());
      std::iota(full.begin(), full.end(), 0);
      for (std::size_t t = 0; t < g.size(); ++t) full[g[t]] = g[order[t]];
      table.push_back({full, parity(order)});
    } while (std::next_permutation(order.begin(), order.end()));
    tables.push_back(std::move(table));
  }
  return {space->dim(),
          [space, tables](std::span<const double> x, std::span<double> y) {
            std::vector<double> current(x.begin(), x.end());
            for (const auto& table : tables) {
              std::vector<double> acc(current.size(), 0.0);
              for (const auto& sp : table) {
                const auto moved = permute(*space, sp.perm, current);
                kernels::axpy(static_cast<double>(sp.sign), moved, acc);
              }
              kernels::scale(1.0 / static_cast<double>(table.size()), acc);
              current = std::move(acc);
            }
            std::copy(current.begin(), current.end(), y.begin());
          },
          true, "Q"};
}

LinearOperator antisymmetrizer(std::size_t total_electrons, const Grid& grid) {
  if (total_electrons < 1 || total_electrons > max_antisymmetrized_electrons)
    throw ConfigError("antisymmetrizer supports 1..4 electrons");
  auto space = std::make_shared<const TensorSpace>(std::vector<Axis>(total_electrons, grid.axis()));
  std::vector<std::size_t> all(total_electrons);
  std::iota(all.begin(), all.end(), 0);
  return antisymmetrizer(space, {all});
}

QuantumState translate_state(const QuantumState& state, double shift, std::span<const std::size_t> which) {
  const TensorSpace& space = *state.space;
  if (which.empty() || shift == 0.0) return state;
  const double h = space.axis(which.front()).spacing;
  const double q = shift / h;
  if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, std::abs(q)))
    throw ConfigError("translation must be an integer multiple of the grid spacing");
  const auto steps = static_cast<std::ptrdiff_t>(std::llround(q));

  std::vector<bool> moves(space.rank(), false);
  for (auto k : which) {
    if (k >= space.rank()) throw ConfigError("translated electron index out of range");
    moves[k] = true;
  }

  QuantumState out{state.space, std::vector<double>(space.dim(), 0.0), state.sector};
  std::vector<std::size_t> index(space.rank());
  double lost = 0.0, total = 0.0;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const double c = state.coefficients[i];
    total += c * c;
    if (c == 0.0) continue;
    space.unravel(i, index);
    bool inside = true;
    for (std::size_t k = 0; k < space.rank(); ++k) {
      if (!moves[k]) continue;
      const auto moved = static_cast<std::ptrdiff_t>(index[k]) + steps;
      if (moved < 0 || moved >= static_cast<std::ptrdiff_t>(space.axis(k).points)) {
        inside = false;
        break;
      }
      index[k] = static_cast<std::size_t>(moved);
    }
    if (inside)
      out.coefficients[space.ravel(index)] = c;
    else
      lost += c * c;
  }
  if (total > 0.0 && lost > 1e-10 * total) {
    std::ostringstream msg;
    msg << "translation by " << shift << " pushes " << lost / total << " of the norm off the grid";
    throw ValidityError(msg.str());
  }
  return out;
}

double pair_interaction(double r, double zi, double zj, double a) {
  return 1.0 / soft_distance(r, a) - 1.0 / soft_distance(r - zi, a) - 1.0 / soft_distance(r + zj, a) +
         1.0 / soft_distance(r + zj - zi, a);
}

DimerSystem::DimerSystem(const DimerSpec& spec, const Grid& grid) : DimerSystem(spec, grid, Options{}) {}

DimerSystem::DimerSystem(const DimerSpec& spec, const Grid& grid, Options options)
    : spec_(spec),
      grid_(grid),
      options_(options),
      frame_(spec.coupling == CouplingMode::full ? Frame::lab : Frame::relative),
      hamiltonian_(zero_operator(1)),
      unperturbed_(zero_operator(1)),
      interaction_(zero_operator(1)),
      sector_(zero_operator(1)),
      atom_sector_(zero_operator(1)) {
  for (const AtomSpec* atom : {&spec.atom1, &spec.atom2}) {
    if (atom->mode != DimensionMode::soft_coulomb_1d)
      throw ConfigError("dimers are built from 1D soft-Coulomb atoms");
    validate_atom(*atom, atom->electrons);
    if (atom->electrons < 1) throw ConfigError("each atom needs at least one electron");
    if (std::abs(atom->charge - atom->electrons) > 1e-12)
      throw ConfigError("dimer atoms must be neutral (charge equal to electron count)");
  }
  if (spec.atom1.softening != spec.atom2.softening)
    throw ConfigError("both atoms must share one softening length");
  if (!(spec.separation > 0.0)) throw ConfigError("separation must be positive");

  const std::size_t n1 = static_cast<std::size_t>(spec.atom1.electrons);
  const std::size_t n_total = n1 + static_cast<std::size_t>(spec.atom2.electrons);
  const double a = spec.atom1.softening;
  const double r = spec.separation;
  const double z1 = spec.atom1.charge, z2 = spec.atom2.charge;

  std::vector<Axis> axes;
  if (frame_ == Frame::lab) {
    atom2_offset_ = grid.steps(r);
    const double cover = std::max(r, options.cover_separation);
    const auto extra = static_cast<std::size_t>(std::ceil(cover / grid.spacing() - 1e-9));
    axes.assign(n_total, grid.extended_axis(extra));
  } else {
    axes.assign(n_total, grid.axis());
  }
  double dim = 1.0;
  for (const auto& ax : axes) dim *= static_cast<double>(ax.points);
  if (dim > static_cast<double>(options.dim_cap)) {
    std::ostringstream msg;
    msg << "dimer dimension " << dim << " exceeds the cap " << options.dim_cap
        << "; reduce grid.points or the separation";
    throw ConfigError(msg.str());
  }
  space_ = std::make_shared<const TensorSpace>(std::move(axes));

  const std::size_t d = space_->dim();
  auto v0 = std::make_shared<std::vector<double>>(d);
  interaction_values_.assign(d, 0.0);
  std::vector<std::size_t> index(n_total);
  std::vector<double> z(n_total);  // relative coordinates
  for (std::size_t i = 0; i < d; ++i) {
    space_->unravel(i, index);
    for (std::size_t k = 0; k < n_total; ++k) z[k] = relative_coordinate(k, index[k]);
    double v = 0.0;
    for (std::size_t k = 0; k < n_total; ++k) v -= (k < n1 ? z1 : z2) / soft_distance(z[k], a);
    for (std::size_t k = 0; k < n_total; ++k)
      for (std::size_t l = k + 1; l < n_total; ++l)
        if ((k < n1) == (l < n1)) v += 1.0 / soft_distance(z[k] - z[l], a);
    (*v0)[i] = v;

    double coupling = 0.0;
    switch (spec.coupling) {
      case CouplingMode::full:
        for (std::size_t p = 0; p < n1; ++p)
          for (std::size_t q = n1; q < n_total; ++q) coupling += pair_interaction(r, z[p], z[q], a);
        break;
      case CouplingMode::dipole_truncated:
        for (std::size_t p = 0; p < n1; ++p)
          for (std::size_t q = n1; q < n_total; ++q) coupling += -2.0 * z[p] * z[q];
        coupling /= r * r * r;
        break;
      case CouplingMode::decoupled: break;
    }
    interaction_values_[i] = coupling;
  }
  potential_.resize(d);
  for (std::size_t i = 0; i < d; ++i) potential_[i] = (*v0)[i] + interaction_values_[i];

  std::ostringstream tag;
  tag << "(" << to_string(spec.coupling) << ",r=" << r << ")";
  unperturbed_ = kinetic_plus_potential(space_, v0, grid.spacing(), "H0" + tag.str());
  hamiltonian_ = kinetic_plus_potential(space_, std::make_shared<const std::vector<double>>(potential_),
                                        grid.spacing(), "H" + tag.str());
  interaction_ = diagonal_operator(interaction_values_, "I" + tag.str());

  std::vector<std::size_t> group1(n1), group2(n_total - n1), all(n_total);
  std::iota(group1.begin(), group1.end(), 0);
  std::iota(group2.begin(), group2.end(), n1);
  std::iota(all.begin(), all.end(), 0);
  atom_sector_ = antisymmetrizer(space_, {group1, group2});
  sector_ = frame_ == Frame::lab ? antisymmetrizer(space_, {all}) : atom_sector_;
}

double DimerSystem::relative_coordinate(std::size_t k, std::size_t i) const {
  const double x = space_->axis(k)[i];
  if (frame_ == Frame::lab && k >= electrons1()) return x - spec_.separation;
  return x;
}

LinearOperator DimerSystem::dipole() const {
  const std::size_t n1 = electrons1(), n = electrons();
  std::vector<double> f(space_->dim(), 0.0);
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < f.size(); ++i) {
    space_->unravel(i, index);
    double v = 0.0;
    for (std::size_t p = 0; p < n1; ++p)
      for (std::size_t q = n1; q < n; ++q)
        v += -2.0 * relative_coordinate(p, index[p]) * relative_coordinate(q, index[q]);
    f[i] = v;
  }
  return diagonal_operator(std::move(f), "f");
}

std::vector<double> DimerSystem::separation_derivative() const {
  const std::size_t d = space_->dim();
  const double r = spec_.separation;
  std::vector<double> out(d, 0.0);
  switch (spec_.coupling) {
    case CouplingMode::decoupled: return out;
    case CouplingMode::dipole_truncated:
      for (std::size_t i = 0; i < d; ++i) out[i] = -3.0 * interaction_values_[i] / r;
      return out;
    case CouplingMode::full: break;
  }
  // Lab frame: nucleus 2 and the nuclear repulsion move with r.
  const std::size_t n1 = electrons1(), n = electrons();
  const double a = spec_.atom1.softening, z1 = spec_.atom1.charge, z2 = spec_.atom2.charge;
  const double dr = soft_distance(r, a);
  const double repulsion = -z1 * z2 * r / (dr * dr * dr);
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < d; ++i) {
    space_->unravel(i, index);
    double v = repulsion;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = space_->axis(k)[index[k]] - r;
      const double du = soft_distance(u, a);
      v -= z2 * u / (du * du * du);
    }
    out[i] = v;
  }
  (void)n1;
  return out;
}

QuantumState DimerSystem::place_pair(const QuantumState& phi1, const QuantumState& phi2) const {
  const std::size_t n1 = electrons1(), n = electrons();
  if (phi1.space->rank() != n1 || phi2.space->rank() != n - n1)
    throw ConfigError("pair placement: atom states do not match the dimer electron counts");
  const std::size_t offset = frame_ == Frame::lab ? atom2_offset_ : 0;

  QuantumState out{space_, std::vector<double>(space_->dim(), 0.0), Sector::plain};
  std::vector<std::size_t> i1(n1), i2(n - n1), full(n);
  for (std::size_t a = 0; a < phi1.space->dim(); ++a) {
    const double c1 = phi1.coefficients[a];
    if (c1 == 0.0) continue;
    phi1.space->unravel(a, i1);
    for (std::size_t k = 0; k < n1; ++k) full[k] = i1[k];
    for (std::size_t b = 0; b < phi2.space->dim(); ++b) {
      const double c2 = phi2.coefficients[b];
      if (c2 == 0.0) continue;
      phi2.space->unravel(b, i2);
      bool inside = true;
      for (std::size_t k = n1; k < n; ++k) {
        full[k] = i2[k - n1] + offset;
        if (full[k] >= space_->axis(k).points) inside = false;
      }
      if (!inside) throw ValidityError("atom 2 does not fit on the dimer grid");
      out.coefficients[space_->ravel(full)] = c1 * c2;
    }
  }
  return out;
}

LinearOperator dimer_hamiltonian(const DimerSpec& spec, const Grid& grid) {
  return DimerSystem(spec, grid).hamiltonian();
}

LinearOperator interaction_operator(const DimerSpec& spec, const Grid& grid) {
  return DimerSystem(spec, grid).interaction();
}

LinearOperator dipole_operator(const DimerSpec& spec, const Grid& grid) {
  return DimerSystem(spec, grid).dipole();
}

}  // namespace dimerlab
