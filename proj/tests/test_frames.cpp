#include "doctest.h"

#include "patchsmith/corpus.hpp"
#include "patchsmith/errors.hpp"
#include "patchsmith/frame_json.hpp"
#include "patchsmith/polygon_frame.hpp"
#include "patchsmith/remesh.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>

using namespace patchsmith;
using std::numbers::pi;

namespace {

PolygonFrame make_frame(std::vector<Vec3> corners, const Vec3& normal = Vec3::UnitZ()) {
  PolygonFrame f;
  f.owner = {ElementKind::Face, 0};
  f.corners = std::move(corners);
  for (std::size_t k = 0; k < f.corners.size(); ++k) f.keys.push_back(static_cast<HalfEdgeId>(k));
  f.normal = normal;
  f.update_centroid();
  return f;
}

PolygonFrame regular(std::size_t K, double radius = 1.0, double phase = 0.0) {
  std::vector<Vec3> c;
  for (std::size_t k = 0; k < K; ++k) {
    const double a = phase + 2.0 * pi * k / K;
    c.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  return make_frame(c);
}

PolygonFrame star_decagon() {
  std::vector<Vec3> c;
  for (int k = 0; k < 10; ++k) {
    const double r = k % 2 == 0 ? 1.0 : 0.4;
    c.emplace_back(r * std::cos(2 * pi * k / 10), r * std::sin(2 * pi * k / 10), 0.0);
  }
  return make_frame(c);
}

double max_plane_distance(const PolygonFrame& f, const Vec3& n) {
  double d = 0.0;
  for (const auto& c : f.corners) d = std::max(d, std::abs((c - f.centroid).dot(n)));
  return d;
}

}  // namespace

TEST_CASE("assign_frames counts") {
  const auto tet = assign_frames(corpus::tetrahedron());
  std::map<ElementKind, std::vector<std::size_t>> sizes;
  for (const auto& f : tet.frames) sizes[f.owner.kind].push_back(f.size());
  CHECK(sizes[ElementKind::Face] == std::vector<std::size_t>(4, 3));
  CHECK(sizes[ElementKind::Vertex] == std::vector<std::size_t>(4, 3));
  CHECK(sizes[ElementKind::Edge] == std::vector<std::size_t>(6, 4));

  const auto cube = assign_frames(corpus::cube());
  sizes.clear();
  for (const auto& f : cube.frames) sizes[f.owner.kind].push_back(f.size());
  CHECK(sizes[ElementKind::Face] == std::vector<std::size_t>(6, 4));
  CHECK(sizes[ElementKind::Vertex] == std::vector<std::size_t>(8, 3));
  CHECK(sizes[ElementKind::Edge] == std::vector<std::size_t>(12, 4));

  const auto ce = assign_frames(corpus::cube_with_edge());
  int tens = 0;
  for (const auto& f : ce.frames) tens += f.size() == 10 && f.owner.kind == ElementKind::Face;
  CHECK(tens == 1);
}

TEST_CASE("frames on the corpus are star-shaped and planar") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto mesh = corpus::by_name(name);
    const auto set = assign_frames(mesh);
    const double eps = 1e-9 * mesh.bounds().diagonal();
    for (const auto& f : set.frames) {
      CAPTURE(f.owner.id);
      CHECK(is_star(planarize(f)));
      Vec3 sum = Vec3::Zero();
      for (std::size_t k = 0; k < f.size(); ++k) sum += f.V(k);
      CHECK(sum.norm() <= 1e-14 * (1.0 + f.centroid.norm()) * f.size());
      if (f.size() != 4) {
        CHECK(max_plane_distance(f, f.normal) <= eps);
      }
      // Single-owner assignment reproduces the batch result bit for bit.
      const auto single = assign_frame(mesh, f.owner, {}, set.bbox_diagonal);
      CHECK(single.corners == f.corners);
      CHECK(single.keys == f.keys);
    }
  }
}

TEST_CASE("edge frames keep the Doo-Sabin quad") {
  const auto mesh = corpus::tetrahedron();
  const auto set = assign_frames(mesh);
  for (auto e : mesh.alive_edges()) {
    const auto* f = set.find({ElementKind::Edge, e});
    REQUIRE(f);
    for (std::size_t k = 0; k < 4; ++k) CHECK(f->corners[k] == doo_sabin_point(mesh, f->keys[k]));
  }
}

TEST_CASE("cube-with-edge 10-gon needs extra Doo-Sabin steps") {
  const auto mesh = corpus::cube_with_edge();
  FrameOptions no_repair;
  no_repair.max_repair_steps = 0;
  const auto raw = assign_frames(mesh, no_repair);
  const auto fixed = assign_frames(mesh);
  for (const auto& f : raw.frames) {
    if (f.size() != 10) continue;
    CHECK_FALSE(is_star(f));
    // Midpoint regularization cannot change the winding number.
    CHECK_FALSE(is_star(regularize_dual(f, 2)));
    CHECK_FALSE(is_star(regularize_dual(f, 8)));
    const auto* g = fixed.find(f.owner);
    CHECK(is_star(*g));
    CHECK((g->centroid - f.centroid).norm() < 1e-12);
  }
}

TEST_CASE("planarize") {
  std::vector<Vec3> pent;
  for (int k = 0; k < 5; ++k) pent.emplace_back(std::cos(1.3 * k) * (1 + 0.1 * k), std::sin(1.3 * k), 0.75);
  const auto p = make_frame(pent);
  const auto q = planarize(p);
  for (std::size_t k = 0; k < 5; ++k) CHECK((q.corners[k] - p.corners[k]).norm() == 0.0);

  auto sq = make_frame({{0, 0, 0}, {1, 0, 0}, {1, 1, 0.3}, {0, 1, 0}});
  const auto s = planarize(sq);
  CHECK(max_plane_distance(s, s.normal) <= 1e-9 * std::sqrt(2.0));
  CHECK((s.centroid - sq.centroid).norm() < 1e-15);
  const auto s2 = planarize(s);
  for (std::size_t k = 0; k < 4; ++k) CHECK((s2.corners[k] - s.corners[k]).norm() <= 1e-14);

  CHECK_THROWS_AS(planarize(make_frame({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}})), DegenerateFrameError);
}

TEST_CASE("planarize normal matches a brute-force plane fit") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> c;
    for (int k = 0; k < 6; ++k) c.emplace_back(U(rng), U(rng), 0.3 * U(rng));
    const auto f = make_frame(c);
    const Vec3 n = planarize(f).normal;
    // Oracle 1: SVD of the centred point matrix.
    Eigen::MatrixXd A(6, 3);
    for (int k = 0; k < 6; ++k) A.row(k) = (c[k] - f.centroid).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Vec3 n_svd = svd.matrixV().col(2);
    CHECK(std::abs(std::abs(n.dot(n_svd)) - 1.0) < 1e-12);
    // Oracle 2: exhaustive sphere search minimizing squared distances.
    auto cost = [&](const Vec3& m) {
      double s = 0.0;
      for (const auto& p : c) s += std::pow((p - f.centroid).dot(m), 2);
      return s;
    };
    Vec3 best = Vec3::UnitZ();
    double best_cost = cost(best);
    for (int i = 0; i <= 400; ++i)
      for (int j = 0; j < 800; ++j) {
        const double th = pi * i / 400, ph = 2 * pi * j / 800;
        const Vec3 m(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        if (const double cm = cost(m); cm < best_cost) {
          best_cost = cm;
          best = m;
        }
      }
    CHECK(std::abs(n.dot(best)) > std::cos(0.02));
    CHECK(cost(n) <= best_cost + 1e-15);
  }
}

TEST_CASE("regularize_dual") {
  for (std::size_t K : {3u, 5u, 6u, 10u}) {
    const auto r = regular(K, 2.0, 0.3);
    const auto d = regularize_dual(r, 2);
    for (std::size_t k = 0; k < K; ++k) CHECK((d.corners[k] - r.corners[k]).norm() < 1e-14);
  }
  CHECK_THROWS_AS(regularize_dual(regular(5), 1), ParamError);
  CHECK_THROWS_AS(regularize_dual(regular(5), 0), ParamError);

  const auto star = star_decagon();
  CHECK_FALSE(frame_quality(star).convex);
  double residual = frame_quality(star).length_residual;
  bool convex = false;
  for (int it = 2; it <= 40 && !convex; it += 2) {
    const auto d = regularize_dual(star, it);
    const auto q = frame_quality(d);
    CHECK(q.length_residual <= residual + 1e-15);
    residual = q.length_residual;
    CHECK((d.centroid - star.centroid).norm() < 1e-15);
    CHECK(max_plane_distance(d, Vec3::UnitZ()) == 0.0);
    convex = q.convex;
  }
  CHECK(convex);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> R(0.3, 1.5), J(-0.4, 0.4);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec3> c;
    for (int k = 0; k < 5; ++k) {
      const double a = 2 * pi * k / 5 + J(rng);
      const double r = R(rng);
      c.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
    const auto f = make_frame(c);
    if (!is_star(f)) continue;
    ++tested;
    CHECK(is_star(regularize_dual(f, 2)));
  }
  CHECK(tested > 100);
}

TEST_CASE("set_frame_params") {
  const auto tri = regular(3);
  const auto id = set_frame_params(tri, 1.0, 0.0, Vec3::Zero());
  CHECK(id.corners == tri.corners);

  const auto big = set_frame_params(tri, 2.0, 0.0, Vec3::Zero());
  for (std::size_t k = 0; k < 3; ++k) CHECK(big.V(k).norm() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK((big.centroid - tri.centroid).norm() < 1e-15);
  CHECK(big.scale == 2.0);

  for (std::size_t K : {3u, 5u, 8u}) {
    const auto r = regular(K);
    const auto rot = set_frame_params(r, 1.0, pi / K, Vec3::Zero());
    for (std::size_t k = 0; k < K; ++k) {
      const Vec3 mid = midpoint(r.corners[k], r.corners[(k + 1) % K]);
      CHECK(angle_between(rot.V(k), mid - r.centroid) < 1e-12);
    }
  }
  const auto moved = set_frame_params(tri, 1.0, 0.0, Vec3(1, 2, 3));
  CHECK((moved.centroid - Vec3(1, 2, 3)).norm() < 1e-15);

  CHECK_THROWS_AS(set_frame_params(tri, 0.0, 0.0, Vec3::Zero()), ParamError);
  CHECK_THROWS_AS(set_frame_params(tri, -1.0, 0.0, Vec3::Zero()), ParamError);
}

TEST_CASE("frame_quality") {
  const auto hex = frame_quality(regular(6));
  CHECK(hex.planarity == 0.0);
  CHECK(hex.angle_residual < 1e-15);
  CHECK(hex.length_residual < 1e-15);
  CHECK(hex.convex);
  CHECK(hex.star);

  const auto star = frame_quality(star_decagon());
  CHECK_FALSE(star.convex);
  CHECK(star.star);

  const auto bowtie = frame_quality(make_frame({{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}}));
  CHECK_FALSE(bowtie.star);
}

TEST_CASE("frame JSON round trip") {
  const auto mesh = corpus::cube_with_edge();
  const auto set = assign_frames(mesh);
  const auto j = to_json(set);
  CHECK(j["frames"].size() == set.frames.size());
  auto copy = assign_frames(mesh);
  for (auto& f : copy.frames) f = set_frame_params(f, 1.5, 0.2, Vec3(0.1, 0, 0));
  apply_frames_json(copy, nlohmann::json::parse(j.dump()));
  for (std::size_t i = 0; i < set.frames.size(); ++i) {
    CHECK(copy.frames[i].corners == set.frames[i].corners);
    CHECK(copy.frames[i].scale == 1.0);
  }
  nlohmann::json bad = {{"frames", {to_json(regular(5))}}};
  CHECK_THROWS_AS(apply_frames_json(copy, bad), ParamError);
}
