#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "aim/milp/lp_format.hpp"
#include "aim/milp/model.hpp"
#include "aim/milp/solver.hpp"

using namespace aim::milp;

namespace {

// ---------------------------------------------------------------------------
// Oracle 1: dense vertex enumeration for small box-bounded LPs.
//
// Every vertex of a bounded polytope is the solution of n active conditions
// drawn from {constraint tight, variable at lower, variable at upper}. We
// enumerate all n-subsets, solve the square system, keep feasible points and
// take the best objective. Independent of the simplex implementation.
// ---------------------------------------------------------------------------

struct DenseLp {
  int n = 0;
  std::vector<double> c;                  // objective
  std::vector<std::vector<double>> rows;  // constraint coefficients
  std::vector<int> sense;                 // -1: <=, +1: >=
  std::vector<double> rhs;
  std::vector<double> lo, hi;
};

bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-9) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

bool lp_point_feasible(const DenseLp& lp, const std::vector<double>& x, double tol) {
  for (int j = 0; j < lp.n; ++j)
    if (x[j] < lp.lo[j] - tol || x[j] > lp.hi[j] + tol) return false;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    double lhs = 0.0;
    for (int j = 0; j < lp.n; ++j) lhs += lp.rows[i][j] * x[j];
    if (lp.sense[i] < 0 && lhs > lp.rhs[i] + tol) return false;
    if (lp.sense[i] > 0 && lhs < lp.rhs[i] - tol) return false;
  }
  return true;
}

// Returns true when a feasible vertex exists; best objective in *best.
bool enumerate_vertices(const DenseLp& lp, double* best) {
  struct Cond {
    std::vector<double> row;
    double rhs;
  };
  std::vector<Cond> pool;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) pool.push_back({lp.rows[i], lp.rhs[i]});
  for (int j = 0; j < lp.n; ++j) {
    std::vector<double> e(lp.n, 0.0);
    e[j] = 1.0;
    pool.push_back({e, lp.lo[j]});
    pool.push_back({e, lp.hi[j]});
  }
  int p = static_cast<int>(pool.size());
  std::vector<int> idx(lp.n);
  bool found = false;
  double bound = 0.0;

  // Iterate all n-combinations of pool indices.
  std::vector<int> comb(lp.n);
  for (int i = 0; i < lp.n; ++i) comb[i] = i;
  while (true) {
    std::vector<std::vector<double>> a(lp.n);
    std::vector<double> b(lp.n);
    for (int i = 0; i < lp.n; ++i) {
      a[i] = pool[comb[i]].row;
      b[i] = pool[comb[i]].rhs;
    }
    std::vector<double> x;
    if (solve_square(a, b, x) && lp_point_feasible(lp, x, 1e-7)) {
      double obj = 0.0;
      for (int j = 0; j < lp.n; ++j) obj += lp.c[j] * x[j];
      if (!found || obj < bound) bound = obj;
      found = true;
    }
    // next combination
    int i = lp.n - 1;
    while (i >= 0 && comb[i] == p - lp.n + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int k = i + 1; k < lp.n; ++k) comb[k] = comb[k - 1] + 1;
  }
  (void)idx;
  *best = bound;
  return found;
}

MilpModel to_model(const DenseLp& lp) {
  MilpModel m;
  std::vector<VarId> v;
  for (int j = 0; j < lp.n; ++j) v.push_back(m.add_continuous(lp.lo[j], lp.hi[j]));
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    LinExpr e;
    for (int j = 0; j < lp.n; ++j)
      if (lp.rows[i][j] != 0.0) e.add(v[j], lp.rows[i][j]);
    m.add_constraint(e, lp.sense[i] < 0 ? Sense::LessEqual : Sense::GreaterEqual, lp.rhs[i]);
  }
  LinExpr obj;
  for (int j = 0; j < lp.n; ++j)
    if (lp.c[j] != 0.0) obj.add(v[j], lp.c[j]);
  m.set_objective(obj);
  return m;
}

DenseLp random_lp(std::mt19937_64& rng, int n, int m) {
  auto coin = [&](double p) { return (rng() >> 11) * 0x1.0p-53 < p; };
  auto uni = [&](double a, double b) { return a + (b - a) * ((rng() >> 11) * 0x1.0p-53); };
  DenseLp lp;
  lp.n = n;
  lp.c.resize(n);
  lp.lo.resize(n);
  lp.hi.resize(n);
  for (int j = 0; j < n; ++j) {
    lp.c[j] = std::round(uni(-4, 4));
    lp.lo[j] = std::round(uni(-5, 0));
    lp.hi[j] = std::round(uni(0, 5));
  }
  for (int i = 0; i < m; ++i) {
    std::vector<double> row(n, 0.0);
    bool nonzero = false;
    for (int j = 0; j < n; ++j) {
      if (coin(0.6)) {
        row[j] = std::round(uni(-3, 3));
        if (row[j] != 0.0) nonzero = true;
      }
    }
    if (!nonzero) row[static_cast<int>(rng() % n)] = 1.0;
    lp.rows.push_back(row);
    lp.sense.push_back(coin(0.5) ? -1 : +1);
    lp.rhs.push_back(std::round(uni(-6, 6)));
  }
  return lp;
}

void check_solution_feasible(const MilpModel& m, const Solution& s, double tol) {
  REQUIRE(s.values.size() == m.num_variables());
  for (std::size_t j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variables()[j];
    CHECK(s.values[j] >= v.lower - tol);
    CHECK(s.values[j] <= v.upper + tol);
    if (v.kind == VarKind::Binary)
      CHECK(std::abs(s.values[j] - std::round(s.values[j])) <= tol);
  }
  for (const auto& c : m.constraints()) {
    double lhs = c.expr.evaluate(s.values);
    switch (c.sense) {
      case Sense::LessEqual: CHECK(lhs <= c.rhs + tol); break;
      case Sense::GreaterEqual: CHECK(lhs >= c.rhs - tol); break;
      case Sense::Equal: CHECK(std::abs(lhs - c.rhs) <= tol); break;
    }
  }
  CHECK(std::abs(s.objective - m.objective().evaluate(s.values)) <= 1e-6);
}

// ---------------------------------------------------------------------------
// Oracle 2: brute force over all binary fixings (each fixing pinned through
// public equality constraints, then the LP optimum is taken).
// ---------------------------------------------------------------------------

struct MilpInstance {
  MilpModel model;
  std::vector<VarId> binaries;
};

bool brute_force_milp(const MilpInstance& inst, double* best) {
  int k = static_cast<int>(inst.binaries.size());
  bool found = false;
  double bound = 0.0;
  for (int mask = 0; mask < (1 << k); ++mask) {
    MilpModel fixed = inst.model;
    for (int b = 0; b < k; ++b) {
      LinExpr e;
      e.add(inst.binaries[b], 1.0);
      fixed.add_constraint(e, Sense::Equal, (mask >> b) & 1 ? 1.0 : 0.0);
    }
    Solution s = solve_lp(fixed);
    if (s.status != SolveStatus::Optimal) continue;
    if (!found || s.objective < bound) bound = s.objective;
    found = true;
  }
  *best = bound;
  return found;
}

MilpInstance random_milp(std::mt19937_64& rng, int nc, int nb, int m) {
  auto coin = [&](double p) { return (rng() >> 11) * 0x1.0p-53 < p; };
  auto uni = [&](double a, double b) { return a + (b - a) * ((rng() >> 11) * 0x1.0p-53); };
  MilpInstance inst;
  std::vector<VarId> vars;
  for (int j = 0; j < nc; ++j) {
    double lo = std::round(uni(-4, 0));
    vars.push_back(inst.model.add_continuous(lo, lo + std::round(uni(1, 8))));
  }
  for (int j = 0; j < nb; ++j) {
    VarId b = inst.model.add_binary();
    inst.binaries.push_back(b);
    vars.push_back(b);
  }
  int n = nc + nb;
  for (int i = 0; i < m; ++i) {
    LinExpr e;
    bool nonzero = false;
    for (int j = 0; j < n; ++j) {
      if (coin(0.55)) {
        double c = std::round(uni(-3, 3));
        if (c != 0.0) {
          e.add(vars[j], c);
          nonzero = true;
        }
      }
    }
    if (!nonzero) e.add(vars[static_cast<int>(rng() % n)], 1.0);
    Sense s = coin(0.5) ? Sense::LessEqual : Sense::GreaterEqual;
    inst.model.add_constraint(e, s, std::round(uni(-5, 6)));
  }
  LinExpr obj;
  for (int j = 0; j < n; ++j) obj.add(vars[j], std::round(uni(-4, 4)));
  inst.model.set_objective(obj);
  return inst;
}

}  // namespace

TEST_CASE("add_variable basics") {
  MilpModel m;
  VarId v0 = m.add_continuous(0.0, 100.0);
  CHECK(v0.index == 0);
  VarId b = m.add_binary();
  CHECK(m.variable(b).kind == VarKind::Binary);
  CHECK(m.variable(b).lower == 0.0);
  CHECK(m.variable(b).upper == 1.0);
  CHECK_THROWS_AS(m.add_continuous(5.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(m.add_variable(VarKind::Binary, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("add_constraint basics") {
  MilpModel m;
  VarId x0 = m.add_continuous(0.0, 10.0);
  LinExpr e;
  e.add(x0, 1.0);
  m.add_constraint(e, Sense::GreaterEqual, 2.0);
  LinExpr obj;
  obj.add(x0, 1.0);
  m.set_objective(obj);
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-9));

  MilpModel m2;
  VarId a = m2.add_continuous(0.0, 1.0);
  VarId b = m2.add_continuous(0.0, 1.0);
  LinExpr sum;
  sum.add(a, 1.0).add(b, 1.0);
  m2.add_constraint(sum, Sense::Equal, 1.0);
  LinExpr obj2;
  obj2.add(a, 1.0);
  m2.set_objective(obj2);
  Solution s2 = solve_lp(m2);
  REQUIRE(s2.status == SolveStatus::Optimal);
  CHECK(s2.value(a) == doctest::Approx(0.0).epsilon(1e-9));

  MilpModel m3;
  m3.add_continuous(0.0, 1.0);
  LinExpr bad;
  bad.add(VarId{99}, 1.0);
  CHECK_THROWS_AS(m3.add_constraint(bad, Sense::LessEqual, 0.0), std::invalid_argument);
}

TEST_CASE("solve_lp pinned examples") {
  MilpModel m;
  VarId x = m.add_continuous(0.0, 1.0);
  VarId y = m.add_continuous(0.0, 1.0);
  LinExpr e;
  e.add(x, 1.0).add(y, 1.0);
  m.add_constraint(e, Sense::LessEqual, 1.0);
  LinExpr obj;
  obj.add(x, -1.0).add(y, -1.0);
  m.set_objective(obj);
  Solution s = solve_lp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-9));

  MilpModel inf;
  VarId z = inf.add_continuous(0.0, 2.0);
  LinExpr ez;
  ez.add(z, 1.0);
  inf.add_constraint(ez, Sense::GreaterEqual, 3.0);
  LinExpr objz;
  objz.add(z, 1.0);
  inf.set_objective(objz);
  CHECK(solve_lp(inf).status == SolveStatus::Infeasible);

  MilpModel unb;
  VarId w = unb.add_continuous(-kInfinity, kInfinity);
  LinExpr objw;
  objw.add(w, 1.0);
  unb.set_objective(objw);
  CHECK(solve_lp(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("solve_lp matches vertex enumeration on random instances") {
  std::mt19937_64 rng(20240817);
  int feasible_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 150; ++trial) {
    DenseLp lp = random_lp(rng, 5, 5);
    MilpModel m = to_model(lp);
    Solution s = solve_lp(m);
    double expected = 0.0;
    bool feasible = enumerate_vertices(lp, &expected);
    if (feasible) {
      ++feasible_seen;
      REQUIRE_MESSAGE(s.status == SolveStatus::Optimal, "trial ", trial);
      CHECK_MESSAGE(std::abs(s.objective - expected) <= 1e-6,
                    "trial ", trial);
      check_solution_feasible(m, s, 1e-6);
    } else {
      ++infeasible_seen;
      CHECK_MESSAGE(s.status == SolveStatus::Infeasible, "trial ", trial);
    }
  }
  // The generator should exercise both outcomes.
  CHECK(feasible_seen > 30);
  CHECK(infeasible_seen > 10);
}

TEST_CASE("solve_milp with zero binaries equals solve_lp bit for bit") {
  std::mt19937_64 rng(7);
  DenseLp lp = random_lp(rng, 5, 4);
  MilpModel m = to_model(lp);
  Solution a = solve_lp(m);
  Solution b = solve_milp(m);
  REQUIRE(a.status == b.status);
  if (a.status == SolveStatus::Optimal) {
    REQUIRE(a.values.size() == b.values.size());
    CHECK(std::memcmp(a.values.data(), b.values.data(),
                      a.values.size() * sizeof(double)) == 0);
    CHECK(a.objective == b.objective);
  }
}

TEST_CASE("big-M disjunction pair: equal desired times end up one gap apart") {
  // Two access times that both want 10.0 but must differ by at least 7.5.
  const double gap = 7.5, big_m = 207.5, desired = 10.0;
  MilpModel m;
  VarId t1 = m.add_continuous(0.0, 200.0);
  VarId t2 = m.add_continuous(0.0, 200.0);
  VarId e1 = m.add_continuous(0.0, kInfinity);
  VarId e2 = m.add_continuous(0.0, kInfinity);
  VarId b = m.add_binary();
  LinExpr c1;
  c1.add(e1, 1.0).add(t1, -1.0);
  m.add_constraint(c1, Sense::GreaterEqual, -desired);
  LinExpr c2;
  c2.add(e1, 1.0).add(t1, 1.0);
  m.add_constraint(c2, Sense::GreaterEqual, desired);
  LinExpr c3;
  c3.add(e2, 1.0).add(t2, -1.0);
  m.add_constraint(c3, Sense::GreaterEqual, -desired);
  LinExpr c4;
  c4.add(e2, 1.0).add(t2, 1.0);
  m.add_constraint(c4, Sense::GreaterEqual, desired);
  LinExpr d1;  // t1 - t2 >= gap - M(1-b)
  d1.add(t1, 1.0).add(t2, -1.0).add(b, -big_m);
  m.add_constraint(d1, Sense::GreaterEqual, gap - big_m);
  LinExpr d2;  // t2 - t1 >= gap - M b
  d2.add(t2, 1.0).add(t1, -1.0).add(b, big_m);
  m.add_constraint(d2, Sense::GreaterEqual, gap);
  LinExpr obj;
  obj.add(e1, 1.0).add(e2, 1.0);
  m.set_objective(obj);

  Solution s = solve_milp(m);
  REQUIRE(s.status == SolveStatus::Optimal);
  // Expected value derived by enumerating both orders: each fixing gives an
  // LP whose optimum spreads the 7.5 s gap across the two deviations.
  MilpInstance inst{m, {b}};
  double expected = 0.0;
  REQUIRE(brute_force_milp(inst, &expected));
  CHECK(std::abs(expected - 7.5) <= 1e-9);
  CHECK(std::abs(s.objective - expected) <= 1e-6);
  CHECK(std::abs(std::abs(s.value(t1) - s.value(t2)) - gap) <= 1e-6);
}

TEST_CASE("solve_milp matches brute force on random instances") {
  std::mt19937_64 rng(998877);
  int optimal_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    int nb = 1 + static_cast<int>(rng() % 8);
    int nc = 2 + static_cast<int>(rng() % 5);
    MilpInstance inst = random_milp(rng, nc, nb, 3 + static_cast<int>(rng() % 5));
    Solution s = solve_milp(inst.model);
    double expected = 0.0;
    bool feasible = brute_force_milp(inst, &expected);
    if (feasible) {
      ++optimal_seen;
      REQUIRE_MESSAGE(s.status == SolveStatus::Optimal, "trial ", trial);
      CHECK_MESSAGE(std::abs(s.objective - expected) <= 1e-6,
                    "trial ", trial);
      check_solution_feasible(inst.model, s, 1e-6);
    } else {
      CHECK_MESSAGE(s.status == SolveStatus::Infeasible, "trial ", trial);
    }
  }
  CHECK(optimal_seen > 40);
}

TEST_CASE("determinism: identical model solves to identical bits") {
  for (int round = 0; round < 5; ++round) {
    std::mt19937_64 rng(1000 + round);
    MilpInstance a = random_milp(rng, 4, 4, 5);
    std::mt19937_64 rng2(1000 + round);
    MilpInstance b = random_milp(rng2, 4, 4, 5);
    Solution sa = solve_milp(a.model);
    Solution sb = solve_milp(b.model);
    REQUIRE(sa.status == sb.status);
    if (sa.status == SolveStatus::Optimal) {
      REQUIRE(sa.values.size() == sb.values.size());
      CHECK(std::memcmp(sa.values.data(), sb.values.data(),
                        sa.values.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("monotonicity: adding a constraint never improves the optimum") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 60; ++trial) {
    MilpInstance inst = random_milp(rng, 4, 3, 4);
    Solution before = solve_milp(inst.model);
    if (before.status != SolveStatus::Optimal) continue;
    // Random extra row.
    LinExpr e;
    for (std::size_t j = 0; j < inst.model.num_variables(); ++j)
      e.add(VarId{static_cast<std::uint32_t>(j)},
            std::round(((rng() >> 11) * 0x1.0p-53) * 6 - 3));
    bool any = false;
    for (auto& [v, c] : e.terms())
      if (c != 0.0) any = true;
    if (!any) continue;
    MilpModel extended = inst.model;
    extended.add_constraint(e, Sense::LessEqual,
                            std::round(((rng() >> 11) * 0x1.0p-53) * 8 - 2));
    Solution after = solve_milp(extended);
    if (after.status == SolveStatus::Optimal)
      CHECK(after.objective >= before.objective - 1e-9);
  }
}

TEST_CASE("iteration limit reported, never a silent wrong answer") {
  MilpModel m;
  VarId x = m.add_continuous(0.0, 10.0);
  VarId y = m.add_continuous(0.0, 10.0);
  LinExpr e;
  e.add(x, 1.0).add(y, 1.0);
  m.add_constraint(e, Sense::GreaterEqual, 5.0);
  LinExpr obj;
  obj.add(x, 1.0).add(y, 2.0);
  m.set_objective(obj);
  SolverOptions opts;
  opts.max_pivots = 1;
  Solution s = solve_lp(m, opts);
  CHECK(s.status == SolveStatus::IterationLimit);
}

TEST_CASE("lp text export") {
  MilpModel empty;
  VarId x = empty.add_continuous(0.0, 4.0);
  LinExpr obj;
  obj.add(x, 2.0);
  empty.set_objective(obj);
  std::string text = export_lp_text(empty);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Subject To") == std::string::npos);
  CHECK(text.find("Binary") == std::string::npos);

  MilpModel m;
  VarId a = m.add_continuous(0.0, 10.0);
  VarId b = m.add_continuous(-1.0, 1.0);
  VarId z = m.add_binary();
  LinExpr c1;
  c1.add(a, 1.0).add(b, -2.5);
  m.add_constraint(c1, Sense::LessEqual, 4.0);
  LinExpr c2;
  c2.add(a, 1.0).add(z, 1.0);
  m.add_constraint(c2, Sense::GreaterEqual, 0.5);
  LinExpr mobj;
  mobj.add(a, 1.0).add(b, 1.0);
  m.set_objective(mobj);
  std::string t1 = export_lp_text(m);
  std::string t2 = export_lp_text(m);
  CHECK(t1 == t2);  // byte-identical re-export
  CHECK(t1.find(" c0: x0 - 2.5 x1 <= 4") != std::string::npos);
  CHECK(t1.find(" c1: x0 + x2 >= 0.5") != std::string::npos);
  CHECK(t1.find("Binary\n x2") != std::string::npos);
  CHECK(std::count(t1.begin(), t1.end(), '\n') >= 8);
}
