#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "vecchia/errors.hpp"
#include "vecchia/geometry.hpp"
#include "vecchia/rng.hpp"

using namespace vecchia;

TEST_CASE("maxmin: forced three-point order") {
  std::vector<Point> pts{{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
  auto ord = maxmin_order(1, pts, {false, false, false});
  CHECK(ord == std::vector<int>{1, 0, 2});
}

TEST_CASE("maxmin: single point") {
  std::vector<Point> pts{{0.4, 0.1}};
  CHECK(maxmin_order(2, pts, {false}) == std::vector<int>{0});
  CHECK_THROWS_AS(maxmin_order(2, {}, {}), input_error);
}

TEST_CASE("maxmin: grid corners plus center match brute force") {
  std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}};
  std::vector<bool> is_pred(5, false);
  CHECK(maxmin_order(2, pts, is_pred) == oracle::maxmin_bruteforce(pts, is_pred));
}

TEST_CASE("maxmin: random sets match brute force, with prediction-last") {
  RandomStream rs(5);
  for (int rep = 0; rep < 6; ++rep) {
    int n = 8 + rep * 4;
    std::vector<Point> pts;
    std::vector<bool> is_pred;
    for (int i = 0; i < n; ++i) {
      pts.push_back({rs.next_uniform(), rs.next_uniform()});
      is_pred.push_back(i % 3 == 0);
    }
    auto got = maxmin_order(2, pts, is_pred);
    CHECK(got == oracle::maxmin_bruteforce(pts, is_pred));

    // prediction-last and permutation
    std::vector<int> sorted = got;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted == expect);
    bool seen_pred = false;
    for (int id : got) {
      if (is_pred[id]) seen_pred = true;
      if (seen_pred) CHECK(is_pred[id]);
    }
  }
}

TEST_CASE("maxmin: each point maximizes its min distance within the group") {
  RandomStream rs(99);
  int n = 30;
  std::vector<Point> pts;
  std::vector<bool> is_pred;
  for (int i = 0; i < n; ++i) {
    pts.push_back({rs.next_uniform(), rs.next_uniform()});
    is_pred.push_back(i >= 20);
  }
  auto ord = maxmin_order(2, pts, is_pred);
  for (int k = 1; k < n; ++k) {
    auto mind = [&](int q) {
      double d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) d = std::min(d, distance(pts[q], pts[ord[j]]));
      return d;
    };
    double chosen = mind(ord[k]);
    for (int kk = k + 1; kk < n; ++kk) {
      if (is_pred[ord[kk]] != is_pred[ord[k]]) continue;  // different group
      CHECK(chosen >= mind(ord[kk]) - 1e-15);
    }
  }
}

TEST_CASE("coordinate order") {
  std::vector<Point> pts{{0.9, 0}, {0.1, 0}, {0.5, 0}};
  CHECK(coordinate_order(1, pts) == std::vector<int>{1, 2, 0});

  std::vector<Point> sorted{{0.1, 0}, {0.2, 0}, {0.7, 0}};
  CHECK(coordinate_order(1, sorted) == std::vector<int>{0, 1, 2});

  CHECK_THROWS_AS(coordinate_order(2, pts), config_error);

  RandomStream rs(3);
  std::vector<Point> many;
  for (int i = 0; i < 100; ++i) many.push_back({rs.next_uniform(), 0});
  auto ord = coordinate_order(1, many);
  std::vector<int> want(100);
  std::iota(want.begin(), want.end(), 0);
  std::sort(want.begin(), want.end(), [&](int a, int b) { return many[a][0] < many[b][0]; });
  CHECK(ord == want);
}

TEST_CASE("nearest_neighbors") {
  RandomStream rs(11);
  std::vector<Point> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({rs.next_uniform(), rs.next_uniform()});
  std::vector<int> cands(50);
  std::iota(cands.begin(), cands.end(), 0);

  CHECK(nearest_neighbors({0.5, 0.5}, pts, cands, 0).empty());
  CHECK(nearest_neighbors({0.5, 0.5}, pts, cands, 100).size() == 50);

  Point q{0.3, 0.7};
  CHECK(nearest_neighbors(q, pts, cands, 5) == oracle::knn_bruteforce(q, pts, cands, 5));

  // tie: two candidates equidistant, lower index wins
  std::vector<Point> tie{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}};
  auto r = nearest_neighbors({0, 0}, tie, {0, 1, 2}, 2);
  CHECK(r == std::vector<int>{0, 1});
}

TEST_CASE("KnnIndex matches the brute-force scan (scan and grid paths)") {
  for (int n : {200, 2000}) {
    RandomStream rs(n);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back({rs.next_uniform(), rs.next_uniform()});
    KnnIndex idx(2, pts);
    std::vector<int> inserted;
    std::vector<int> got;
    for (int i = 0; i < n; ++i) {
      if (i % 7 == 0) {
        Point q{rs.next_uniform(), rs.next_uniform()};
        idx.query(q, 8, got);
        CHECK(got == oracle::knn_bruteforce(q, pts, inserted, 8));
      }
      idx.insert(i);
      inserted.push_back(i);
    }
    // full-set queries
    for (int rep = 0; rep < 20; ++rep) {
      Point q{rs.next_uniform(), rs.next_uniform()};
      idx.query(q, 12, got);
      CHECK(got == oracle::knn_bruteforce(q, pts, inserted, 12));
    }
  }
}

TEST_CASE("KnnIndex: 1-D grid path") {
  int n = 1500;
  RandomStream rs(42);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rs.next_uniform(), 0.0});
  KnnIndex idx(1, pts);
  std::vector<int> inserted;
  for (int i = 0; i < n; ++i) {
    idx.insert(i);
    inserted.push_back(i);
  }
  std::vector<int> got;
  for (int rep = 0; rep < 25; ++rep) {
    Point q{rs.next_uniform(), 0.0};
    idx.query(q, 6, got);
    CHECK(got == oracle::knn_bruteforce(q, pts, inserted, 6));
  }
}

TEST_CASE("min separation filter") {
  std::vector<Point> pts{{0, 0}, {1e-6, 0}, {0.5, 0}, {0.5 + 5e-5, 0}};
  auto kept = min_separation_filter(pts, 1e-4);
  CHECK(kept == std::vector<int>{0, 2});
}

TEST_CASE("GeometryModel: ordering bookkeeping") {
  RandomStream rs(8);
  std::vector<Point> pts;
  std::vector<bool> is_pred;
  for (int i = 0; i < 25; ++i) {
    pts.push_back({rs.next_uniform(), rs.next_uniform()});
    is_pred.push_back(i % 4 == 0);
  }
  GeometryModel g = GeometryModel::build(2, pts, is_pred, Ordering::maxmin);
  CHECK(g.op_restricted);
  CHECK(g.n_obs() + g.n_pred() == 25);
  for (int k = 0; k < g.n_obs(); ++k) CHECK(g.observed[k] == k);
  for (int k = 0; k < g.n(); ++k) {
    CHECK(g.locations[k][0] == pts[g.permutation[k]][0]);
    CHECK(g.is_observed(k) == !is_pred[g.permutation[k]]);
  }

  // 1-D coordinate with OP restriction: observed ascending then prediction ascending
  std::vector<Point> pts1;
  std::vector<bool> pred1;
  for (int i = 0; i < 12; ++i) {
    pts1.push_back({rs.next_uniform(), 0.0});
    pred1.push_back(i % 2 == 0);
  }
  GeometryModel g1 = GeometryModel::build(1, pts1, pred1, Ordering::coordinate, true);
  for (int k = 1; k < g1.n_obs(); ++k) CHECK(g1.locations[k][0] > g1.locations[k - 1][0]);
  for (int k = g1.n_obs() + 1; k < g1.n(); ++k) CHECK(g1.locations[k][0] > g1.locations[k - 1][0]);

  // global coordinate ordering (no OP restriction)
  GeometryModel g2 = GeometryModel::build(1, pts1, pred1, Ordering::coordinate, false);
  CHECK(!g2.op_restricted);
  for (int k = 1; k < g2.n(); ++k) CHECK(g2.locations[k][0] > g2.locations[k - 1][0]);
}
