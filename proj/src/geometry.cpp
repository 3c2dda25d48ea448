#include "plcurate/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace plcurate::geometry {

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
  return r;
}

double Mat3::det() const {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

namespace {

// Cyclic Jacobi eigensolver for a symmetric 3x3 matrix. Eigenvalues are
// returned in descending order with matching orthonormal eigenvectors as the
// columns of V.
void jacobi_eigen(const Mat3& a_in, std::array<double, 3>& eigvals, Mat3& v_out) {
  std::array<std::array<double, 3>, 3> a = a_in.m;
  Mat3 v = Mat3::identity();

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    const double diag = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]);
    if (off <= 1e-14 * (diag + 1e-300)) break;
    static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pq : pairs) {
      const int p = pq[0], q = pq[1];
      if (a[p][q] == 0.0) continue;
      const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
      const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      for (int k = 0; k < 3; ++k) {
        const double akp = a[k][p], akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
      }
      for (int k = 0; k < 3; ++k) {
        const double apk = a[p][k], aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
      }
      for (int k = 0; k < 3; ++k) {
        const double vkp = v.m[k][p], vkq = v.m[k][q];
        v.m[k][p] = c * vkp - s * vkq;
        v.m[k][q] = s * vkp + c * vkq;
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::array<double, 3> lam = {a[0][0], a[1][1], a[2][2]};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return lam[i] > lam[j]; });
  Mat3 sorted;
  for (int j = 0; j < 3; ++j) {
    eigvals[j] = lam[order[j]];
    for (int i = 0; i < 3; ++i) sorted.m[i][j] = v.m[i][order[j]];
  }
  v_out = sorted;
}

Vec3 column(const Mat3& m, int j) { return {m.m[0][j], m.m[1][j], m.m[2][j]}; }

void set_column(Mat3& m, int j, const Vec3& v) {
  m.m[0][j] = v.x;
  m.m[1][j] = v.y;
  m.m[2][j] = v.z;
}

Vec3 any_unit_perpendicular(const Vec3& u) {
  const Vec3 probe = std::abs(u.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 w = u.cross(probe);
  return w / w.norm();
}

}  // namespace

KabschResult kabsch(std::span<const Vec3> moving, std::span<const Vec3> target) {
  if (moving.size() != target.size())
    throw LengthMismatch("point lists differ in length");
  const std::size_t n = moving.size();
  if (n < 3) throw TooFewPoints("superposition needs at least 3 point pairs");

  Vec3 cp{}, cq{};
  for (std::size_t i = 0; i < n; ++i) {
    cp += moving[i];
    cq += target[i];
  }
  cp = cp / static_cast<double>(n);
  cq = cq / static_cast<double>(n);

  Mat3 h;  // covariance sum p~ q~^T
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h.m[i][j] = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 p = moving[k] - cp;
    const Vec3 q = target[k] - cq;
    const double pv[3] = {p.x, p.y, p.z};
    const double qv[3] = {q.x, q.y, q.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h.m[i][j] += pv[i] * qv[j];
  }

  const Mat3 hth = h.transposed() * h;
  std::array<double, 3> lam;
  Mat3 v;
  jacobi_eigen(hth, lam, v);
  const double s0 = std::sqrt(std::max(lam[0], 0.0));
  const double s1 = std::sqrt(std::max(lam[1], 0.0));

  KabschResult result;
  Mat3 rotation = Mat3::identity();
  const double tiny = 1e-12;
  if (s0 <= tiny) {
    // All displacement vectors (near) zero: any rotation is optimal.
    result.degenerate = true;
  } else {
    Vec3 v0 = column(v, 0), v1 = column(v, 1);
    Vec3 u0 = h * v0;
    u0 = u0 / u0.norm();
    Vec3 u1;
    if (s1 > 1e-9 * s0) {
      u1 = h * v1;
      u1 = u1 - u0 * u1.dot(u0);  // re-orthogonalise against rounding
      u1 = u1 / u1.norm();
    } else {
      result.degenerate = true;  // collinear points
      u1 = any_unit_perpendicular(u0);
      v1 = v1 - v0 * v1.dot(v0);
      const double v1n = v1.norm();
      v1 = v1n > tiny ? v1 / v1n : any_unit_perpendicular(v0);
    }
    // Completing both bases right-handed folds the reflection correction
    // into R = V U^T.
    const Vec3 u2 = u0.cross(u1);
    const Vec3 v2 = v0.cross(v1);
    Mat3 u_mat, v_mat;
    set_column(u_mat, 0, u0);
    set_column(u_mat, 1, u1);
    set_column(u_mat, 2, u2);
    set_column(v_mat, 0, v0);
    set_column(v_mat, 1, v1);
    set_column(v_mat, 2, v2);
    rotation = v_mat * u_mat.transposed();
  }

  result.transform.rotation = rotation;
  result.transform.translation = cq - rotation * cp;

  double ssd = 0;
  for (std::size_t k = 0; k < n; ++k)
    ssd += distance2(result.transform.apply(moving[k]), target[k]);
  result.rmsd_after = std::sqrt(ssd / static_cast<double>(n));
  return result;
}

double rmsd(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) throw LengthMismatch("point lists differ in length");
  if (a.empty()) throw TooFewPoints("RMSD of empty point lists");
  double ssd = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ssd += distance2(a[i], b[i]);
  return std::sqrt(ssd / static_cast<double>(a.size()));
}

// ---------------------------------------------------------------------------
// NeighborGrid

namespace {

constexpr std::int64_t kGridOffset = 1 << 20;

std::uint64_t cell_key(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
  if (std::abs(ix) >= kGridOffset || std::abs(iy) >= kGridOffset || std::abs(iz) >= kGridOffset)
    throw Error("coordinate outside supported grid range");
  return (static_cast<std::uint64_t>(ix + kGridOffset) << 42) |
         (static_cast<std::uint64_t>(iy + kGridOffset) << 21) |
         static_cast<std::uint64_t>(iz + kGridOffset);
}

std::int64_t cell_index(double x, double cell) {
  return static_cast<std::int64_t>(std::floor(x / cell));
}

}  // namespace

NeighborGrid::NeighborGrid(std::span<const Vec3> points, double cell_size)
    : cell_size_(cell_size), points_(points.begin(), points.end()) {
  if (cell_size <= 0) throw Error("grid cell size must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    cells_[cell_key(cell_index(p.x, cell_size_), cell_index(p.y, cell_size_),
                    cell_index(p.z, cell_size_))]
        .push_back(static_cast<int>(i));
  }
}

void NeighborGrid::query(const Vec3& q, double radius, std::vector<int>& out) const {
  if (radius > cell_size_) throw Error("query radius exceeds grid cell size");
  out.clear();
  const double r2 = radius * radius;
  const std::int64_t cx = cell_index(q.x, cell_size_);
  const std::int64_t cy = cell_index(q.y, cell_size_);
  const std::int64_t cz = cell_index(q.z, cell_size_);
  for (std::int64_t dx = -1; dx <= 1; ++dx)
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        const auto it = cells_.find(cell_key(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (int idx : it->second)
          if (distance2(points_[idx], q) <= r2) out.push_back(idx);
      }
}

std::vector<int> NeighborGrid::query(const Vec3& q, double radius) const {
  std::vector<int> out;
  query(q, radius, out);
  return out;
}

// ---------------------------------------------------------------------------
// Pocket and shell selection

RegionSelection select_pocket_and_shell(const structio::ComplexStructure& reference,
                                        double pocket_cutoff, double shell_cutoff) {
  if (pocket_cutoff <= 0 || shell_cutoff <= pocket_cutoff)
    throw Error("region cutoffs must satisfy 0 < pocket < shell");
  std::vector<Vec3> ligand;
  for (const auto& a : reference.ligand_atoms)
    if (!a.is_hydrogen()) ligand.push_back(a.position);
  if (ligand.empty()) throw structio::NoLigand("reference has no ligand heavy atoms");
  if (reference.residue_count() == 0)
    throw structio::NoPolymer("reference has no polymer residues");

  RegionSelection sel;
  sel.pocket_cutoff = pocket_cutoff;
  sel.shell_cutoff = shell_cutoff;

  const NeighborGrid grid(ligand, shell_cutoff);
  const double p2 = pocket_cutoff * pocket_cutoff;
  const double s2 = shell_cutoff * shell_cutoff;

  std::vector<int> hits;
  for (const auto& chain : reference.polymer_chains) {
    for (const auto& res : chain.residues) {
      bool in_pocket = false, in_shell = false;
      for (const auto& atom : res.atoms) {
        if (atom.is_hydrogen()) continue;
        grid.query(atom.position, shell_cutoff, hits);
        for (int idx : hits) {
          const double d2 = distance2(atom.position, ligand[idx]);
          if (d2 <= p2) {
            in_pocket = true;
            break;
          }
          if (d2 <= s2) in_shell = true;
        }
        if (in_pocket) break;
      }
      const structio::ResidueKey key{chain.id, res.seq, res.insertion_code};
      if (in_pocket)
        sel.pocket.insert(key);
      else if (in_shell)
        sel.shell.insert(key);
    }
  }
  return sel;
}

}  // namespace plcurate::geometry
