#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wgf/dynamics.hpp"
#include "wgf/errors.hpp"

using namespace wgf;

namespace {

const ReferenceDensity kGauss = ReferenceDensity::gaussian();

Eigen::MatrixXd dense_bb_inverse(const NetworkParams& p) {
  const std::size_t k = p.size();
  return oracle::gaussian_metric(p, 12.0, 2000).bottomRightCorner(k, k).inverse();
}

// d/db_i of the one-sided entropy counting the atom F(b_1) at f = 0:
// F(b_1) log F(b_1) + int_{b_1}^inf p log(p / D) dz, by central differences of
// a Simpson evaluation.
double one_sided_entropy(const NetworkParams& p) {
  double total = 0.0;
  const double f1 = oracle::Phi(p.biases[0]);
  total += f1 * std::log(f1);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p.slope(i);
    const double lo = p.biases[i], hi = i + 1 < p.size() ? p.biases[i + 1] : 12.0;
    total += oracle::simpson([&](double z) { return oracle::phi(z) * (std::log(oracle::phi(z)) - std::log(s)); }, lo,
                             hi, 2000);
  }
  return total;
}

}  // namespace

TEST_CASE("closed-form heat flow equals the natural gradient of the entropy") {
  std::mt19937_64 rng(41);
  for (int n : {2, 5, 12}) {
    for (int trial = 0; trial < 5; ++trial) {
      const NetworkParams p = oracle::random_one_sided(n, rng, -2.0, 2.0, 0.05);
      const auto rhs = heat_flow_rhs(p, kGauss);
      const auto g = entropy_bias_gradient(p, kGauss);
      const auto tri = analytic_inverse_bb(p, kGauss).apply(g);
      const Eigen::Map<const Eigen::VectorXd> gv(g.data(), n);
      const Eigen::VectorXd dense = -dense_bb_inverse(p) * gv;
      for (int i = 0; i < n; ++i) {
        CHECK(rhs[i] == doctest::Approx(-tri[i]).epsilon(1e-10).scale(1.0));
        CHECK(rhs[i] == doctest::Approx(dense(i)).epsilon(1e-7).scale(1.0));
      }
    }
  }
}

TEST_CASE("entropy bias gradient against finite differences") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const NetworkParams p = oracle::random_one_sided(6, rng, -2.0, 2.0, 0.1);
    const auto g = entropy_bias_gradient(p, kGauss);
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto e = [&](double b) {
        NetworkParams q = p;
        q.biases[i] = b;
        return one_sided_entropy(q);
      };
      const double fd = oracle::central_difference(e, p.biases[i], 1e-5);
      if (i == 0) {
        // the node-1 formula leaves out -p(b_1) log p(b_1)
        const double pb = oracle::phi(p.biases[0]);
        CHECK(g[0] == doctest::Approx(pb * (std::log(oracle::Phi(p.biases[0])) + 1.0 + std::log(p.slope(0)))).epsilon(1e-12));
        CHECK(g[0] - pb * std::log(pb) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      } else {
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("closed-form potential flow equals the natural gradient of the potential energy") {
  std::mt19937_64 rng(43);
  auto dV = [](double x) { return x * x * x - 1.5 * x; };
  for (int trial = 0; trial < 5; ++trial) {
    const NetworkParams p = oracle::random_one_sided(7, rng, -2.0, 2.0, 0.05);
    const std::size_t n = p.size();
    // dE/db_i = -a_i int_{b_i}^inf V'(f) p dz
    Eigen::VectorXd g(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> breaks(p.biases.begin() + i, p.biases.end());
      const oracle::Rule r = oracle::piecewise_rule(p.biases[i], 12.0, breaks, 2000);
      double s = 0.0;
      for (std::size_t q = 0; q < r.x.size(); ++q) s += r.w[q] * dV(oracle::forward(p, r.x[q])) * oracle::phi(r.x[q]);
      g(i) = -p.slope(i) * s;
    }
    const Eigen::VectorXd want = -dense_bb_inverse(p) * g;
    const auto exact = potential_flow_rhs(p, dV, kGauss, Quadrature::exact);
    for (std::size_t i = 0; i < n; ++i) CHECK(exact[i] == doctest::Approx(want(i)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("trapezoid potential flow converges to the exact rule as the mesh refines") {
  auto dV = [](double x) { return x * x * x - 1.5 * x; };
  std::vector<double> err;
  for (int n : {50, 100, 200, 400}) {
    std::vector<double> a(n, 1.0 / n), b(n);
    for (int i = 0; i < n; ++i) b[i] = -3.0 + 6.0 * i / (n - 1);
    const NetworkParams p = make_one_sided(a, b);
    const auto exact = potential_flow_rhs(p, dV, kGauss, Quadrature::exact);
    const auto trap = potential_flow_rhs(p, dV, kGauss, Quadrature::trapezoid);
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      if (std::abs(b[i]) <= 2.0) e = std::max(e, std::abs(trap[i] - exact[i]) / (1.0 + std::abs(exact[i])));
    MESSAGE("n = " << n << " interior error " << e);
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < 0.6 * err[k - 1]);
}

TEST_CASE("map velocity is the bias velocity pushed through the Jacobian") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> uz(-4.0, 4.0), ub(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const NetworkParams p = trial % 2 ? oracle::random_symmetric(4, rng) : oracle::random_one_sided(6, rng);
    std::vector<double> bdot(p.size());
    for (double& x : bdot) x = ub(rng);
    const PiecewiseVelocity v = map_velocity(p, bdot);
    for (int k = 0; k < 100; ++k) {
      const double z = uz(rng);
      const auto j = oracle::jacobian(p, z);
      double want = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) want += bdot[i] * j[p.size() + i];
      CHECK(v(z) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("pinched nodes repel under the heat flow") {
  std::vector<double> b{-1.0, 0.0, 0.3, 1.0};
  for (double gap : {1e-1, 1e-2, 1e-3, 1e-4}) {
    b[2] = b[1] + gap;
    const NetworkParams p = make_one_sided({0.25, 0.25, 0.25, 0.25}, b);
    const auto v = heat_flow_rhs(p, kGauss);
    CHECK(v[2] - v[1] > 0.0);
  }
  // the repulsion grows like the inverse gap
  auto rel = [&](double gap) {
    b[2] = b[1] + gap;
    const auto v = heat_flow_rhs(make_one_sided({0.25, 0.25, 0.25, 0.25}, b), kGauss);
    return v[2] - v[1];
  };
  CHECK(rel(1e-4) / rel(1e-3) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("heat flow keeps the biases ordered") {
  // unit weights, leftmost node started away from the rest
  for (int n : {16, 32}) {
    std::vector<double> a(n, 1.0), b(n);
    b[0] = -5.0;
    for (int i = 1; i < n; ++i) b[i] = -3.0 + 6.0 * (i - 1) / (n - 2);
    NetworkParams p = make_one_sided(a, b);
    const double h = 1e-4;
    for (int step = 0; step < 1000; ++step) {
      const auto v = heat_flow_rhs(p, kGauss);
      for (int i = 0; i < n; ++i) p.biases[i] += h * v[i];
      REQUIRE(is_monotone_one_sided(p));
    }
    CHECK(min_bias_gap(p) > 0.1);
  }
}

TEST_CASE("euler step updates only the selected coordinates") {
  const NetworkParams p = init_identity(3, 2.0, 1e-2, 3.0);
  std::vector<double> grad(p.dim());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 0.1 * (i + 1);
  for (ParamSubset s : {ParamSubset::a_only, ParamSubset::b_only, ParamSubset::both}) {
    const auto idx = subset_indices(p, s);
    MetricTensor G{2.0 * Eigen::MatrixXd::Identity(idx.size(), idx.size())};
    const NetworkParams q = euler_step(p, grad, G, 0.5, s);
    const auto t0 = p.flatten(), t1 = q.flatten();
    std::vector<bool> moved(t0.size(), false);
    for (std::size_t r : idx) {
      moved[r] = true;
      CHECK(t1[r] == doctest::Approx(t0[r] - 0.25 * grad[r]));
    }
    for (std::size_t c = 0; c < t0.size(); ++c)
      if (!moved[c]) CHECK(t1[c] == t0[c]);
  }
  MetricTensor bad{Eigen::MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(euler_step(p, grad, bad, 0.1, ParamSubset::both), std::invalid_argument);
}

TEST_CASE("one tridiagonal flow step equals the closed-form potential flow") {
  // frozen-sample gradient with the analytic inverse, compared on a huge sample
  const int n = 6;
  std::vector<double> a(n, 1.0 / n), b(n);
  for (int i = 0; i < n; ++i) b[i] = -2.0 + 4.0 * i / (n - 1);
  NetworkParams p = make_one_sided(a, b);
  EnergySpec spec;
  spec.terms = {quadratic_potential(0.0)};
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 1;
  cfg.metric_mode = MetricMode::analytic_gaussian;
  cfg.param_subset = ParamSubset::b_only;
  cfg.sample_count = 2000000;
  cfg.seed = 5;
  cfg.snapshot_steps = {1};
  const TrajectoryRecord rec = run_flow(p, spec, kGauss, cfg);
  const auto v = potential_flow_rhs(p, [](double x) { return x; }, kGauss, Quadrature::exact);
  for (int i = 0; i < n; ++i) {
    const double moved = (rec.theta_history[0].biases[i] - b[i]) / cfg.dt;
    CHECK(moved == doctest::Approx(v[i]).epsilon(0.02).scale(1.0));
  }
}

TEST_CASE("run_flow is deterministic and records what it was asked to") {
  const NetworkParams p = init_identity(6, 3.0, 5e-6, 6.0);
  EnergySpec spec;
  spec.terms = {quartic_potential()};
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 20;
  cfg.sample_count = 5000;
  cfg.seed = 9;
  cfg.snapshot_steps = {0, 10, 20};
  const TrajectoryRecord r1 = run_flow(p, spec, kGauss, cfg);
  const TrajectoryRecord r2 = run_flow(p, spec, kGauss, cfg);
  REQUIRE(r1.times.size() == 21);
  REQUIRE(r1.theta_history.size() == 3);
  CHECK(r1.energy == r2.energy);
  CHECK(r1.theta_history[2].flatten() == r2.theta_history[2].flatten());
  CHECK(r1.theta_history[0].flatten() == p.flatten());
  CHECK(r1.times.back() == doctest::Approx(0.02));
  // the potential energy decreases along the flow
  CHECK(r1.energy.back() < r1.energy.front());

  cfg.resample = true;
  const TrajectoryRecord r3 = run_flow(p, spec, kGauss, cfg);
  CHECK(r3.energy.front() == r1.energy.front());
  CHECK(r3.energy.back() != r1.energy.back());

  FlowConfig bad = cfg;
  bad.steps = 0;
  CHECK_THROWS_AS(run_flow(p, spec, kGauss, bad), std::invalid_argument);
  bad = cfg;
  bad.metric_mode = MetricMode::analytic_gaussian;
  CHECK_THROWS_AS(run_flow(p, spec, ReferenceDensity::gaussian(1.0, 2.0), bad), std::invalid_argument);
}

TEST_CASE("numeric failures name the step") {
  // an entropy flow whose samples sit where the one-sided map is flat
  const NetworkParams p = make_one_sided({1.0, 1.0}, {0.0, 1.0});
  EnergySpec spec;
  spec.terms = {InternalTerm{InternalKind::entropy}};
  FlowConfig cfg;
  cfg.steps = 2;
  cfg.sample_count = 100;
  try {
    run_flow(p, spec, kGauss, cfg);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).rfind("step 0:", 0) == 0);
  }
}
