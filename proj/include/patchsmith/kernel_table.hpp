#pragma once

#include "patchsmith/bezier.hpp"

#include "json.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <string>
#include <vector>

namespace patchsmith {

using Rational = boost::multiprecision::cpp_rational;

/// mask[m][n][i][j]: weight of parent P_ij in child-00 point (m,n). The
/// other quadrants reflect indices: child (a,b) point (m,n) uses
/// mask[a ? 3-m : m][b ? 3-n : n] with parent index i -> 3-i when a and
/// j -> 3-j when b.
template <typename T>
using MaskArray = std::array<std::array<std::array<std::array<T, 4>, 4>, 4>, 4>;

struct KernelTable {
  MaskArray<double> mask{};
  std::string provenance;
};

struct ExactKernelTable {
  MaskArray<Rational> mask{};
  std::string provenance;

  KernelTable to_double() const;
};

ExactKernelTable standard_kernels_exact();
const KernelTable& standard_kernels();
/// The modified table as a frozen literal.
const KernelTable& modified_kernels();
ExactKernelTable modified_kernels_exact();

struct DeriveOptions {
  /// When false the interior masks [2..3][2..3] keep their standard
  /// weights (negative control for the C2 readjustment).
  bool readjust = true;
};

/// Symbolic midpoint de Casteljau with the corner-scaling rule at level
/// (1,1), followed by the exact C2 readjustment of the interior masks.
/// Throws KernelDerivationError if the constraints are inconsistent.
ExactKernelTable derive_modified_kernels(const DeriveOptions& options = {});

struct MaskDifference {
  int m = 0;
  int n = 0;
  double max_abs = 0.0;
};
/// Masks whose weights differ by more than `tolerance`.
std::vector<MaskDifference> kernel_diff(const KernelTable& a, const KernelTable& b, double tolerance = 0.0);

/// Child nets in quadrant order 00, 01, 10, 11 (index 2a + b).
std::array<ControlNet, 4> subdivide_net(const ControlNet& P, const KernelTable& table);

/// Children with inherited corner meta: child 00 keeps corner 0, child 10
/// corner 1, child 11 corner 2, child 01 corner 3; new corners are regular.
std::array<BezierPatch, 4> subdivide(const BezierPatch& patch, const KernelTable& table);

/// Quadrant (a,b) owning patch corner c.
inline int child_of_corner(int c) {
  static constexpr int q[4] = {0, 2, 3, 1};
  return q[c];
}

enum class SubdivisionMode { Standard, Modified };
const KernelTable& kernels_for(SubdivisionMode mode);
const char* to_string(SubdivisionMode mode);
/// Throws ParamError for names other than "standard" and "modified".
SubdivisionMode mode_from_string(const std::string& name);

/// `{provenance, masks:[{m, n, weights:[16 exact decimal strings]}]}`
nlohmann::json to_json(const ExactKernelTable& table);

/// Exact decimal string for a rational with a terminating expansion,
/// otherwise "p/q".
std::string exact_decimal(const Rational& r);

/// `{provenance, masks:[{m, n, weights:[16 exact strings, row-major]}]}`
nlohmann::json to_json(const ExactKernelTable& table);

}  // namespace patchsmith
