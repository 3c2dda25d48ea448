#pragma once

#include <array>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "plcurate/errors.hpp"
#include "plcurate/structio.hpp"
#include "plcurate/vec3.hpp"

namespace plcurate::geometry {

struct Mat3 {
  // m[row][col]
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Mat3 identity() { return {}; }
  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double det() const;
};

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

struct TooFewPoints : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

struct KabschResult {
  RigidTransform transform;
  double rmsd_after = 0.0;
  bool degenerate = false;  // points (near-)collinear; rotation still valid
};

// Least-squares rigid superposition: transform minimising
// sum ||R p + t - q||^2 over corresponding points. Covariance 3x3 SVD with
// reflection correction; the SVD comes from a cyclic Jacobi eigensolver.
KabschResult kabsch(std::span<const Vec3> moving, std::span<const Vec3> target);

// Plain coordinate RMSD over corresponding points, no fitting.
double rmsd(std::span<const Vec3> a, std::span<const Vec3> b);

// Uniform-cell spatial hash; query radius must not exceed the cell size.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const Vec3> points, double cell_size);

  // Indices of stored points within `radius` of q (inclusive boundary).
  void query(const Vec3& q, double radius, std::vector<int>& out) const;
  std::vector<int> query(const Vec3& q, double radius) const;

 private:
  double cell_size_;
  std::vector<Vec3> points_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

struct RegionSelection {
  std::set<structio::ResidueKey> pocket;
  std::set<structio::ResidueKey> shell;
  double pocket_cutoff = 6.0;
  double shell_cutoff = 8.0;
};

// Pocket: residues with any heavy atom within pocket_cutoff of any ligand
// heavy atom. Shell: within shell_cutoff but not in the pocket. Boundaries
// are inclusive.
RegionSelection select_pocket_and_shell(const structio::ComplexStructure& reference,
                                        double pocket_cutoff = 6.0, double shell_cutoff = 8.0);

}  // namespace plcurate::geometry
