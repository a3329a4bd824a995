// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "kernel_reference.hpp"
#include "ring_fixtures.hpp"
#include "session_fuzz.hpp"

#include "patchsmith/corpus.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>

using namespace patchsmith;
using namespace testutil;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

PatchSet assemble(const HalfEdgeMesh& mesh) { return build_patches(mesh, assign_frames(mesh)); }

Outcome standard_exactness() {
  std::mt19937 rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = random_net(rng);
    const auto child = subdivide_net(P, standard_kernels())[0];
    for (int a = 0; a <= 8; ++a)
      for (int b = 0; b <= 8; ++b) {
        const double u = a / 8.0, v = b / 8.0;
        worst = std::max(worst, (evaluate_bezier(child, u, v).point - de_casteljau(P, u / 2, v / 2)).norm());
      }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 1.0, fmt("max error %.3g (tol 1e-12), %.3f s (limit 1 s)", worst, t)};
}

Outcome boundary_preservation() {
  std::mt19937 rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = random_net(rng);
    const auto S = subdivide_net(P, standard_kernels());
    const auto M = subdivide_net(P, modified_kernels());
    for (int q = 0; q < 4; ++q) {
      const double uo = q / 2, vo = q % 2;  // outer sides of child q
      for (int k = 0; k <= 16; ++k) {
        const double s = k / 16.0;
        worst = std::max(worst, (evaluate_bezier(M[q], uo, s).point - evaluate_bezier(S[q], uo, s).point).norm());
        worst = std::max(worst, (evaluate_bezier(M[q], s, vo).point - evaluate_bezier(S[q], s, vo).point).norm());
      }
    }
  }
  return {worst <= 1e-12, fmt("max boundary difference %.3g (tol 1e-12)", worst)};
}

Outcome unbroken_line() {
  std::mt19937 rng(103);
  double modified = 0.0, formula = 0.0, k3 = 0.0;
  for (std::size_t K : {3u, 5u, 6u, 8u, 10u}) {
    auto nets = ring_nets(regular_ring(K, 0.7), rng);
    for (int d = 1; d <= 5; ++d) {
      subdivide_all(nets, modified_kernels());
      modified = std::max(modified, ring_defects(corner_samples(nets)).unbroken_line);
    }
    const auto V = regular_ring(K);
    auto std_nets = ring_nets(V, rng);
    subdivide_all(std_nets, standard_kernels());
    const double got = ring_defects(corner_samples(std_nets)).unbroken_line;
    formula = std::max(formula, std::abs(got - standard_closed_form(V)));
    if (K == 3) k3 = got;
  }
  return {modified <= 1e-12 && formula <= 1e-12 && k3 > 1e-3,
          fmt("modified %.3g (tol 1e-12); standard vs closed form %.3g (tol 1e-12); standard K=3 %.4f (> 1e-3)",
              modified, formula, k3)};
}

Outcome planarity() {
  double worst_growth = -1.0;
  std::set<int> valences;
  for (const auto& name : corpus::names()) {
    const auto patches = assemble(corpus::by_name(name));
    std::vector<std::vector<PatchTree>> by_depth(6);
    for (int d = 0; d <= 5; ++d)
      for (const auto& p : patches.patches) by_depth[d].push_back(build_patch_tree(p, d, modified_kernels()));
    for (const auto& fan : patches.fans) {
      bool all_split = true;
      for (const auto& [p, c] : fan.members) all_split = all_split && patches.patches[p].extraordinary();
      if (!all_split) continue;
      valences.insert(static_cast<int>(fan.members.size()));
      const double input = ring_defects(corner_ring(patches, by_depth[0], fan)).planarity;
      for (int d = 1; d <= 5; ++d)
        worst_growth =
            std::max(worst_growth, ring_defects(corner_ring(patches, by_depth[d], fan)).planarity - input);
    }
  }
  // Non-planar synthetic rings of every corpus valence.
  std::mt19937 rng(104);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  for (int K : valences) {
    auto V = regular_ring(static_cast<std::size_t>(K));
    for (auto& v : V) v.z() = U(rng);
    auto nets = ring_nets(V, rng);
    const double input = ring_defects(corner_samples(nets)).planarity;
    for (int d = 1; d <= 5; ++d) {
      subdivide_all(nets, modified_kernels());
      worst_growth = std::max(worst_growth, ring_defects(corner_samples(nets)).planarity - input);
    }
  }
  std::string ks;
  for (int K : valences) ks += (ks.empty() ? "" : ",") + std::to_string(K);
  return {worst_growth <= 1e-14, fmt("max growth over input %.3g (tol 1e-14)", worst_growth) + ", K in {" + ks + "}"};
}

Outcome normal_spread() {
  double worst = 0.0;
  for (const auto& name : corpus::names()) {
    const auto patches = assemble(corpus::by_name(name));
    for (int depth = 0; depth <= 4; ++depth)
      worst = std::max(worst, analyze(patches, AnalysisOptions{depth, SubdivisionMode::Modified, 32})
                                  .summary.max_normal_spread_ev);
  }
  return {worst <= 1e-9, fmt("max normal spread %.3g rad (tol 1e-9)", worst)};
}

Outcome c1_decay() {
  bool ok = true;
  std::string detail;
  for (const auto& name : corpus::names()) {
    const auto rows = compare_modes(assemble(corpus::by_name(name)), {1, 2, 3, 4, 5});
    std::vector<double> modified, standard;
    for (const auto& r : rows)
      (r.mode == SubdivisionMode::Modified ? modified : standard).push_back(r.summary.max_c1_ev);
    const bool has_ev = standard.back() > 0.0;
    bool model_ok = true;
    if (has_ev) {
      for (std::size_t d = 1; d < modified.size(); ++d) model_ok = model_ok && modified[d] < modified[d - 1];
      model_ok = model_ok && modified.back() < 1e-3;
      for (double s : standard) model_ok = model_ok && s > 10.0 * modified.back();
    } else {
      for (double m : modified) model_ok = model_ok && m == 0.0;
    }
    ok = ok && model_ok;
    detail += name + (has_ev ? fmt(" d5 %.2g std min %.3g", modified.back(),
                                   *std::min_element(standard.begin(), standard.end()))
                             : std::string(" no EV"));
    detail += "; ";
  }
  return {ok, detail + "(decreasing, d5 < 1e-3, standard > 10x d5)"};
}

Outcome internal_c2() {
  std::mt19937 rng(107);
  const auto control = derive_modified_kernels({.readjust = false}).to_double();
  double worst = 0.0;
  int control_fails = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto P = random_net(rng);
    worst = std::max(worst, child_c2_defect(subdivide_net(P, modified_kernels())));
    if (child_c2_defect(subdivide_net(P, control)) > 1e-6) ++control_fails;
  }
  return {worst <= 1e-9 && control_fails >= 95,
          fmt("max %.3g (tol 1e-9); control > 1e-6 on %.0f/100 (need 95)", worst, control_fails)};
}

Outcome kernel_consistency() {
  const auto derived = derive_modified_kernels();
  const auto standard = standard_kernels_exact();
  int mismatched = 0, bad_sums = 0, bad_boundary = 0;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      Rational sum = 0;
      bool same = true;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const Rational ref(reference::kModified[m][n].w[i][j], reference::kModified[m][n].den);
          same = same && derived.mask[m][n][i][j] == ref;
          sum += derived.mask[m][n][i][j];
        }
      mismatched += !same;
      bad_sums += sum != 1;
      if ((m == 0 || n == 0) && derived.mask[m][n] != standard.mask[m][n]) ++bad_boundary;
    }
  return {mismatched == 0 && bad_sums == 0 && bad_boundary == 0,
          fmt("masks differing from the hand table %.0f, row sums != 1 %.0f, boundary masks != standard %.0f",
              mismatched, bad_sums, bad_boundary)};
}

Outcome topology() {
  PipelineConfig c;
  c.max_depth = 3;
  c.leaf_resolution = 5;
  bool ok = true;
  std::string detail;
  for (const auto& [name, chi] : std::vector<std::pair<std::string, long>>{
           {"cube_edge", 0}, {"tetrahedron", 2}, {"cube", 2}}) {
    const auto t0 = Clock::now();
    const auto r = run_pipeline(corpus::by_name(name), c);
    r.tessellation.mesh.to_halfedge();  // throws unless a closed 2-manifold
    const double t = seconds_since(t0);
    const long got = r.tessellation.mesh.euler_characteristic();
    ok = ok && got == chi && t < 5.0;
    detail += name + " chi " + std::to_string(got) + fmt(" %.2f s; ", t);
  }
  return {ok, detail + "(limit 5 s)"};
}

Outcome incremental() {
  std::mt19937_64 rng(110);
  int equal = 0, edits = 0;
  std::string first;
  std::map<EditOp, int> counts;
  double editing = 0.0;
  for (int seq = 0; seq < 50; ++seq) {
    Session s(corpus::cube(), PipelineConfig{});
    const int length = std::uniform_int_distribution<int>(1, 10)(rng);
    const auto t0 = Clock::now();
    edits += random_sequence(s, rng, length, &counts);
    editing += seconds_since(t0);
    const auto diff = first_difference(s.state(), run_pipeline(s.state().mesh, s.state().config));
    if (diff.empty())
      ++equal;
    else if (first.empty())
      first = "sequence " + std::to_string(seq) + ": " + diff;
  }
  std::string ops;
  for (const auto& [op, n] : counts) ops += std::string(", ") + to_string(op) + " " + std::to_string(n);
  return {equal == 50, fmt("%.0f/50 sequences bitwise equal (%.0f edits", equal, edits) + ops +
                           fmt("; %.1f ms per accepted edit)", 1000.0 * editing / std::max(edits, 1)) +
                           (first.empty() ? "" : "; first difference " + first)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"standard-kernel exactness", standard_exactness},
      {"boundary preservation", boundary_preservation},
      {"unbroken-line property", unbroken_line},
      {"planarity preservation", planarity},
      {"G1 at extraordinary vertices", normal_spread},
      {"C1 along EV-emanating edges", c1_decay},
      {"internal C2", internal_c2},
      {"kernel derivation consistency", kernel_consistency},
      {"topology end-to-end", topology},
      {"incremental = batch", incremental},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
