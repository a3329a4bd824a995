#include "patchsmith/kernel_table.hpp"

#include "patchsmith/errors.hpp"

#include <map>

namespace patchsmith {

namespace {

using RMask = std::array<std::array<Rational, 4>, 4>;

struct IntMask {
  int denominator;
  int w[4][4];
};

// Modified table, child-00 quadrant. Rows are parent i, columns parent j.
constexpr IntMask kModified[4][4] = {
    {
        {1, {{1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {2, {{1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {4, {{1, 2, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {8, {{1, 3, 3, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
    },
    {
        {2, {{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {2, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {8, {{2, 1, 1, 0}, {0, 3, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
        {8, {{1, 1, 1, 1}, {0, 2, 2, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}},
    },
    {
        {4, {{1, 0, 0, 0}, {2, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}}},
        {8, {{2, 0, 0, 0}, {1, 3, 0, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}}},
        {16, {{2, 1, 1, 0}, {1, 5, 2, 0}, {1, 2, 1, 0}, {0, 0, 0, 0}}},
        {32, {{2, 2, 2, 2}, {1, 7, 7, 1}, {1, 3, 3, 1}, {0, 0, 0, 0}}},
    },
    {
        {8, {{1, 0, 0, 0}, {3, 0, 0, 0}, {3, 0, 0, 0}, {1, 0, 0, 0}}},
        {8, {{1, 0, 0, 0}, {1, 2, 0, 0}, {1, 2, 0, 0}, {1, 0, 0, 0}}},
        {32, {{2, 1, 1, 0}, {2, 7, 3, 0}, {2, 7, 3, 0}, {2, 1, 1, 0}}},
        {32, {{1, 1, 1, 1}, {1, 5, 5, 1}, {1, 5, 5, 1}, {1, 1, 1, 1}}},
    },
};

RMask unit(int i, int j) {
  RMask m{};
  m[i][j] = 1;
  return m;
}

RMask average(const RMask& a, const RMask& b) {
  RMask m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = (a[i][j] + b[i][j]) / 2;
  return m;
}

// Pyramid of the tensor-product midpoint de Casteljau scheme. level(a,b)
// holds a (4-a) x (4-b) grid of affine combinations of the parent net; the
// child-00 point (m,n) is level(m,n)[0][0]. With `modified`, the four corner
// entries of level (1,1) are replaced by the corner-diagonal average before
// anything downstream consumes them.
MaskArray<Rational> pyramid(bool modified) {
  std::map<std::pair<int, int>, std::map<std::pair<int, int>, RMask>> level;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) level[{0, 0}][{i, j}] = unit(i, j);
  for (int total = 1; total <= 6; ++total) {
    for (int a = 0; a <= 3; ++a) {
      const int b = total - a;
      if (b < 0 || b > 3) continue;
      auto& g = level[{a, b}];
      for (int i = 0; i < 4 - a; ++i)
        for (int j = 0; j < 4 - b; ++j) {
          // Columns beyond level 1 in v are averaged in v so they see the
          // replaced level-(1,1) entries.
          if (a > 0 && b <= 1) {
            const auto& src = level[{a - 1, b}];
            g[{i, j}] = average(src.at({i, j}), src.at({i + 1, j}));
          } else {
            const auto& src = level[{a, b - 1}];
            g[{i, j}] = average(src.at({i, j}), src.at({i, j + 1}));
          }
        }
      if (modified && a == 1 && b == 1) {
        g[{0, 0}] = average(unit(0, 0), unit(1, 1));
        g[{0, 2}] = average(unit(0, 3), unit(1, 2));
        g[{2, 0}] = average(unit(3, 0), unit(2, 1));
        g[{2, 2}] = average(unit(3, 3), unit(2, 2));
      }
    }
  }
  MaskArray<Rational> out;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) out[m][n] = level[{m, n}][{0, 0}];
  return out;
}

bool is_unknown(int m, int n) { return m >= 2 && n >= 2; }
int unknown_slot(int m, int n) { return ((m - 2) * 2 + (n - 2)) * 16; }

// Exact row reduction of [A | b]; returns the independent rows.
void row_reduce(std::vector<std::vector<Rational>>& A, std::vector<Rational>& b) {
  const std::size_t cols = A.empty() ? 0 : A[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < A.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < A.size() && A[pivot][c] == 0) ++pivot;
    if (pivot == A.size()) continue;
    std::swap(A[pivot], A[rank]);
    std::swap(b[pivot], b[rank]);
    const Rational inv = 1 / A[rank][c];
    for (auto& x : A[rank]) x *= inv;
    b[rank] *= inv;
    for (std::size_t r = 0; r < A.size(); ++r) {
      if (r == rank || A[r][c] == 0) continue;
      const Rational f = A[r][c];
      for (std::size_t k = c; k < cols; ++k) A[r][k] -= f * A[rank][k];
      b[r] -= f * b[rank];
    }
    ++rank;
  }
  for (std::size_t r = rank; r < A.size(); ++r)
    if (b[r] != 0) throw KernelDerivationError("C2 readjustment constraints are inconsistent");
  A.resize(rank);
  b.resize(rank);
}

// Solves the square system M y = r exactly (M symmetric positive definite).
std::vector<Rational> solve(std::vector<std::vector<Rational>> M, std::vector<Rational> r) {
  const std::size_t n = M.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && M[pivot][c] == 0) ++pivot;
    if (pivot == n) throw KernelDerivationError("singular normal equations");
    std::swap(M[pivot], M[c]);
    std::swap(r[pivot], r[c]);
    for (std::size_t k = c + 1; k < n; ++k) {
      if (M[k][c] == 0) continue;
      const Rational f = M[k][c] / M[c][c];
      for (std::size_t j = c; j < n; ++j) M[k][j] -= f * M[c][j];
      r[k] -= f * r[c];
    }
  }
  std::vector<Rational> y(n);
  for (std::size_t c = n; c-- > 0;) {
    Rational s = r[c];
    for (std::size_t j = c + 1; j < n; ++j) s -= M[c][j] * y[j];
    y[c] = s / M[c][c];
  }
  return y;
}

// Minimum-norm correction of the interior masks so the four children meet
// with C0, C1 and C2 continuity across u = 1/2 and v = 1/2.
void readjust(MaskArray<Rational>& mask) {
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  auto entry = [&](int m, int n, int i, int j, const Rational& c, std::vector<Rational>& row, Rational& rhs) {
    if (is_unknown(m, n)) row[unknown_slot(m, n) + i * 4 + j] += c;
    else rhs -= c * mask[m][n][i][j];
  };
  for (int dir = 0; dir < 2; ++dir) {
    for (int t = 0; t < 4; ++t) {
      // Mask index of level k across the boundary at position t.
      auto mn = [&](int k) { return dir == 0 ? std::pair{k, t} : std::pair{t, k}; };
      // Reflected parent entry.
      auto refl = [&](int i, int j) { return dir == 0 ? std::pair{3 - i, j} : std::pair{i, 3 - j}; };
      // Each constraint: sum_k c_k M_k - sum_k d_k R(M_k) = 0.
      const std::vector<std::pair<std::array<int, 4>, std::array<int, 4>>> constraints = {
          {{0, 0, 0, 1}, {0, 0, 0, 1}},    // C0: M3 = R M3
          {{0, 0, -1, 1}, {0, 0, 1, -1}},  // C1: M3 - M2 = R M2 - R M3
          {{0, 1, -2, 1}, {0, 1, -2, 1}},  // C2: M3 - 2 M2 + M1 = R M1 - 2 R M2 + R M3
      };
      for (const auto& [c, d] : constraints) {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) {
            std::vector<Rational> row(64);
            Rational rhs = 0;
            for (int k = 1; k < 4; ++k) {
              const auto [m, n] = mn(k);
              if (c[k] != 0) entry(m, n, i, j, Rational(c[k]), row, rhs);
              if (d[k] != 0) {
                const auto [ri, rj] = refl(i, j);
                entry(m, n, ri, rj, Rational(-d[k]), row, rhs);
              }
            }
            A.push_back(std::move(row));
            b.push_back(std::move(rhs));
          }
      }
    }
  }

  // Drop equations that involve no unknowns after checking they hold.
  std::vector<std::vector<Rational>> A2;
  std::vector<Rational> b2;
  for (std::size_t r = 0; r < A.size(); ++r) {
    bool any = false;
    for (const auto& x : A[r]) any = any || x != 0;
    if (any) {
      A2.push_back(std::move(A[r]));
      b2.push_back(std::move(b[r]));
    } else if (b[r] != 0) {
      throw KernelDerivationError("boundary kernels violate the child continuity constraints");
    }
  }
  row_reduce(A2, b2);

  std::vector<Rational> x0(64);
  for (int m = 2; m < 4; ++m)
    for (int n = 2; n < 4; ++n)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x0[unknown_slot(m, n) + i * 4 + j] = mask[m][n][i][j];

  const std::size_t r = A2.size();
  std::vector<Rational> residual(r);
  for (std::size_t k = 0; k < r; ++k) {
    Rational s = b2[k];
    for (std::size_t c = 0; c < 64; ++c) s -= A2[k][c] * x0[c];
    residual[k] = s;
  }
  std::vector<std::vector<Rational>> normal(r, std::vector<Rational>(r));
  for (std::size_t p = 0; p < r; ++p)
    for (std::size_t q = p; q < r; ++q) {
      Rational s = 0;
      for (std::size_t c = 0; c < 64; ++c) s += A2[p][c] * A2[q][c];
      normal[p][q] = normal[q][p] = s;
    }
  const auto y = r ? solve(normal, residual) : std::vector<Rational>{};
  for (std::size_t c = 0; c < 64; ++c) {
    Rational dx = 0;
    for (std::size_t k = 0; k < r; ++k) dx += A2[k][c] * y[k];
    x0[c] += dx;
  }
  for (int m = 2; m < 4; ++m)
    for (int n = 2; n < 4; ++n)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) mask[m][n][i][j] = x0[unknown_slot(m, n) + i * 4 + j];
}

KernelTable build_double(const MaskArray<Rational>& exact, std::string provenance) {
  KernelTable t;
  t.provenance = std::move(provenance);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t.mask[m][n][i][j] = exact[m][n][i][j].convert_to<double>();
  return t;
}

}  // namespace

KernelTable ExactKernelTable::to_double() const { return build_double(mask, provenance); }

ExactKernelTable standard_kernels_exact() { return {pyramid(false), "standard"}; }

const KernelTable& standard_kernels() {
  static const KernelTable table = standard_kernels_exact().to_double();
  return table;
}

ExactKernelTable modified_kernels_exact() {
  ExactKernelTable t;
  t.provenance = "derived-modified";
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t.mask[m][n][i][j] = Rational(kModified[m][n].w[i][j], kModified[m][n].denominator);
  return t;
}

const KernelTable& modified_kernels() {
  static const KernelTable table = modified_kernels_exact().to_double();
  return table;
}

ExactKernelTable derive_modified_kernels(const DeriveOptions& options) {
  ExactKernelTable t;
  t.provenance = "derived-modified";
  t.mask = pyramid(true);
  if (options.readjust) {
    readjust(t.mask);
  } else {
    const auto standard = pyramid(false);
    for (int m = 2; m < 4; ++m)
      for (int n = 2; n < 4; ++n) t.mask[m][n] = standard[m][n];
  }
  return t;
}

std::vector<MaskDifference> kernel_diff(const KernelTable& a, const KernelTable& b, double tolerance) {
  std::vector<MaskDifference> out;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      double d = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) d = std::max(d, std::abs(a.mask[m][n][i][j] - b.mask[m][n][i][j]));
      if (d > tolerance) out.push_back({m, n, d});
    }
  return out;
}

std::array<ControlNet, 4> subdivide_net(const ControlNet& P, const KernelTable& table) {
  std::array<ControlNet, 4> children;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto& child = children[2 * a + b];
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          const auto& w = table.mask[a ? 3 - m : m][b ? 3 - n : n];
          Vec3 sum = Vec3::Zero();
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
              if (w[i][j] != 0.0) sum += w[i][j] * P[a ? 3 - i : i][b ? 3 - j : j];
          child[m][n] = sum;
        }
    }
  return children;
}

std::array<BezierPatch, 4> subdivide(const BezierPatch& patch, const KernelTable& table) {
  const auto nets = subdivide_net(patch.P, table);
  std::array<BezierPatch, 4> children;
  for (int q = 0; q < 4; ++q) {
    children[q].id = patch.id;
    children[q].P = nets[q];
  }
  for (int c = 0; c < 4; ++c) children[child_of_corner(c)].corners[c] = patch.corners[c];
  return children;
}

const KernelTable& kernels_for(SubdivisionMode mode) {
  return mode == SubdivisionMode::Standard ? standard_kernels() : modified_kernels();
}

const char* to_string(SubdivisionMode mode) { return mode == SubdivisionMode::Standard ? "standard" : "modified"; }

SubdivisionMode mode_from_string(const std::string& name) {
  if (name == "standard") return SubdivisionMode::Standard;
  if (name == "modified") return SubdivisionMode::Modified;
  throw ParamError("unknown subdivision mode '" + name + "'");
}

std::string exact_decimal(const Rational& r) {
  using boost::multiprecision::cpp_int;
  cpp_int num = boost::multiprecision::numerator(r);
  cpp_int den = boost::multiprecision::denominator(r);
  cpp_int d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return num.str() + "/" + den.str();
  const int digits = std::max(twos, fives);
  cpp_int scale = 1;
  for (int k = 0; k < digits; ++k) scale *= 10;
  cpp_int scaled = num * scale / den;
  const bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.str();
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
  }
  return negative ? "-" + s : s;
}

nlohmann::json to_json(const ExactKernelTable& table) {
  nlohmann::json masks = nlohmann::json::array();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      std::vector<std::string> w;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w.push_back(exact_decimal(table.mask[m][n][i][j]));
      masks.push_back({{"m", m}, {"n", n}, {"weights", w}});
    }
  return {{"provenance", table.provenance}, {"masks", masks}};
}

}  // namespace patchsmith
