#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qec/gradient.hpp"
#include "qec/systems.hpp"

using namespace qec;
using test_helpers::max_abs_diff;
using test_helpers::random_control;
using test_helpers::random_state;

namespace {

// Independent objective route: public per-slice propagators only, no shared
// code with the gradient engine.
double objective_via_propagators(const HamiltonianModel& model, const MemberParams& member,
                                 const ControlStrategy& u, const TimeGrid& grid,
                                 const QuantumState& initial, const QuantumState& target) {
  Vec psi = initial.amplitudes();
  for (int q = 0; q < grid.slices; ++q) {
    auto h = build_hamiltonian(model, member, u.values().col(q));
    auto uq = slice_propagator(h, grid.dt());
    psi = uq.entries() * psi;
  }
  return std::norm(psi.dot(target.amplitudes()));
}

// Entries below 1e-10 in magnitude are compared absolutely against the
// cancellation noise floor of central differences at delta = 1e-6 (a few
// ulps of J divided by 2 delta, about 1e-9); the rest by relative error.
void check_gradient_match(const RealMat& scaled_analytic, const RealMat& fd, double rel_tol) {
  REQUIRE(scaled_analytic.rows() == fd.rows());
  REQUIRE(scaled_analytic.cols() == fd.cols());
  for (int m = 0; m < fd.rows(); ++m) {
    for (int q = 0; q < fd.cols(); ++q) {
      const double a = scaled_analytic(m, q);
      const double f = fd(m, q);
      if (std::abs(a) < 1e-10) {
        CHECK(std::abs(f) < 1e-8);
      } else {
        CHECK(std::abs(a - f) / std::max(std::abs(a), std::abs(f)) < rel_tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("finite differences recover polynomial gradients") {
  std::mt19937_64 rng(11);
  auto u = random_control(rng, 2, 8);
  auto quadratic = [](const ControlStrategy& c) { return c.values().squaredNorm(); };
  auto fd = finite_difference_gradient(quadratic, u, 1e-5);
  CHECK(max_abs_diff(fd.values(), RealMat(2.0 * u.values())) < 1e-9);

  auto constant = [](const ControlStrategy&) { return 3.5; };
  auto zero = finite_difference_gradient(constant, u, 1e-5);
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(finite_difference_gradient(quadratic, u, 0.0), ValidationError);
}

TEST_CASE("analytic gradient matches central differences on random instances") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> unif(0.8, 1.2);
  for (int trial = 0; trial < 20; ++trial) {
    const bool three_level = trial % 2 == 1;
    const auto model = three_level ? lambda_system_model() : spin_half_model();
    const Eigen::Index d = model.dim();
    const int q_count = 12;
    TimeGrid grid(1.2, q_count);
    auto u = random_control(rng, model.channels(), q_count);
    MemberParams member{unif(rng), unif(rng), "x"};
    auto psi0 = random_state(rng, d);
    auto target = random_state(rng, d);

    auto analytic = fidelity_gradient(model, member, u, grid, psi0, target);
    auto fd = finite_difference_gradient(
        [&](const ControlStrategy& c) {
          return objective_via_propagators(model, member, c, grid, psi0, target);
        },
        u, 1e-6);
    check_gradient_match(RealMat(grid.dt() * analytic.values()), fd.values(), 1e-5);
  }
}

TEST_CASE("the gradient vanishes at an exact fidelity-one control") {
  std::mt19937_64 rng(5);
  auto model = spin_half_model();
  TimeGrid grid(1.0, 30);
  auto u = random_control(rng, 2, 30);
  MemberParams member{0.95, 1.05, "x"};
  auto psi0 = QuantumState::basis(2, 0);
  // Take the reached state as the target: J = 1 by construction.
  auto reached = propagate(model, member, u, grid, psi0).final;
  auto grad = fidelity_gradient(model, member, u, grid, psi0, reached);
  CHECK(grad.values().cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("commuting control channels have zero gradient under free evolution") {
  // Drift sigma_z/2 with a sigma_z-like control channel plus transverse ones.
  HamiltonianModel model(HermitianOperator(0.5 * pauli_z()),
                         {HermitianOperator(0.5 * pauli_z()),
                          HermitianOperator(0.5 * pauli_x()),
                          HermitianOperator(0.5 * pauli_y())});
  TimeGrid grid(2.0, 50);
  auto u = ControlStrategy::zero(3, grid.slices);
  auto psi0 = QuantumState::basis(2, 0);
  MemberParams member{1.0, 1.0, "x"};

  Vec sup(2);
  sup << cxd(1 / std::sqrt(2.0), 0), cxd(1 / std::sqrt(2.0), 0);
  QuantumState target(std::move(sup));

  auto grad = fidelity_gradient(model, member, u, grid, psi0, target);
  CHECK(grad.values().row(0).cwiseAbs().maxCoeff() < 1e-12);  // z channel
  CHECK(grad.values().row(1).cwiseAbs().maxCoeff() > 0.01);   // x channel
  CHECK(grad.values().row(2).cwiseAbs().maxCoeff() > 0.01);   // y channel

  auto fd = finite_difference_gradient(
      [&](const ControlStrategy& c) {
        return objective_via_propagators(model, member, c, grid, psi0, target);
      },
      u, 1e-6);
  check_gradient_match(RealMat(grid.dt() * grad.values()), fd.values(), 1e-5);
}

TEST_CASE("ensemble gradient with singleton classes is the weighted pair sum") {
  auto model = spin_half_model();
  TimeGrid grid(1.5, 25);
  std::mt19937_64 rng(23);
  auto u = random_control(rng, 2, 25);
  auto psi0 = QuantumState::basis(2, 0);
  auto t_a = QuantumState::basis(2, 0);
  auto t_b = QuantumState::basis(2, 1);
  MemberParams a{0.9, 0.9, "A"}, b{1.1, 1.1, "B"};

  TrainingSet training;
  training.members = {a, b};
  training.partition = {{"A", 1}, {"B", 1}};
  std::vector<ClassModel> classes{{"A", model, t_a}, {"B", model, t_b}};

  auto combined = ensemble_gradient(classes, training, u, grid, psi0, {0.5, 0.5});
  auto grad_a = fidelity_gradient(model, a, u, grid, psi0, t_a);
  auto grad_b = fidelity_gradient(model, b, u, grid, psi0, t_b);
  RealMat expected = 0.5 * grad_a.values();
  expected += 0.5 * grad_b.values();
  CHECK(max_abs_diff(combined.values(), expected) < 1e-15);
}

TEST_CASE("ensemble gradient matches central differences of the class-mean objective") {
  auto model = spin_half_model();
  TimeGrid grid(1.0, 10);
  std::mt19937_64 rng(37);
  auto u = random_control(rng, 2, 10);
  auto psi0 = QuantumState::basis(2, 0);
  std::vector<ClassModel> classes{{"A", model, QuantumState::basis(2, 0)},
                                  {"B", model, QuantumState::basis(2, 1)}};
  TrainingSet training;
  training.members = {{0.88, 0.91, "A"}, {0.92, 0.9, "A"}, {1.1, 1.12, "B"}, {1.08, 1.09, "B"}};
  training.partition = {{"A", 2}, {"B", 2}};
  const std::vector<double> weights{0.5, 0.5};

  auto analytic = ensemble_gradient(classes, training, u, grid, psi0, weights);
  auto fd = finite_difference_gradient(
      [&](const ControlStrategy& c) {
        double j = 0.0;
        for (const auto& member : training.members) {
          const auto& target = member.label == "A" ? classes[0].target : classes[1].target;
          j += 0.25 * objective_via_propagators(model, member, c, grid, psi0, target);
        }
        return j;  // w_c / N_c = 0.5 / 2 for every member
      },
      u, 1e-6);
  check_gradient_match(RealMat(grid.dt() * analytic.values()), fd.values(), 1e-5);
}

TEST_CASE("member order within a class does not change the reduction") {
  auto model = spin_half_model();
  TimeGrid grid(1.0, 15);
  std::mt19937_64 rng(41);
  auto u = random_control(rng, 2, 15);
  auto psi0 = QuantumState::basis(2, 0);
  std::vector<ClassModel> classes{{"A", model, QuantumState::basis(2, 0)},
                                  {"B", model, QuantumState::basis(2, 1)}};
  TrainingSet ordered;
  ordered.members = {{0.85, 0.9, "A"}, {0.9, 0.85, "A"}, {0.95, 0.88, "A"},
                     {1.1, 1.15, "B"}, {1.15, 1.1, "B"}};
  ordered.partition = {{"A", 3}, {"B", 2}};
  TrainingSet permuted = ordered;
  std::swap(permuted.members[0], permuted.members[2]);

  auto g1 = ensemble_gradient(classes, ordered, u, grid, psi0, {0.5, 0.5});
  auto g2 = ensemble_gradient(classes, permuted, u, grid, psi0, {0.5, 0.5});
  CHECK(max_abs_diff(g1.values(), g2.values()) < 1e-12);
}

TEST_CASE("ensemble gradient is linear in the class weights") {
  auto model = spin_half_model();
  TimeGrid grid(1.0, 12);
  std::mt19937_64 rng(43);
  auto u = random_control(rng, 2, 12);
  auto psi0 = QuantumState::basis(2, 0);
  std::vector<ClassModel> classes{{"A", model, QuantumState::basis(2, 0)},
                                  {"B", model, QuantumState::basis(2, 1)}};
  TrainingSet training;
  training.members = {{0.9, 0.9, "A"}, {1.1, 1.1, "B"}};
  training.partition = {{"A", 1}, {"B", 1}};

  auto g1 = ensemble_gradient(classes, training, u, grid, psi0, {0.3, 0.7});
  auto g2 = ensemble_gradient(classes, training, u, grid, psi0, {0.7, 0.3});
  auto gm = ensemble_gradient(classes, training, u, grid, psi0, {0.5, 0.5});
  RealMat averaged = 0.5 * (g1.values() + g2.values());
  CHECK(max_abs_diff(averaged, gm.values()) < 1e-12);
}

TEST_CASE("a global phase on the target leaves the gradient unchanged") {
  auto model = lambda_system_model();
  TimeGrid grid(1.0, 14);
  std::mt19937_64 rng(47);
  auto u = random_control(rng, 2, 14);
  auto psi0 = QuantumState::uniform(3);
  auto target = random_state(rng, 3);
  QuantumState rotated(Vec(std::exp(imag_unit * cxd(1.234, 0)) * target.amplitudes()));
  MemberParams member{1.02, 0.97, "x"};

  auto g1 = fidelity_gradient(model, member, u, grid, psi0, target);
  auto g2 = fidelity_gradient(model, member, u, grid, psi0, rotated);
  CHECK(max_abs_diff(g1.values(), g2.values()) < 1e-10);
}

TEST_CASE("small-step ascent never decreases the discrimination objective") {
  auto model = spin_half_model();
  TimeGrid grid(5.0, 500);
  auto u = ControlStrategy::sine(2, grid);
  auto psi0 = QuantumState::basis(2, 0);
  auto t_a = QuantumState::basis(2, 0);
  auto t_b = QuantumState::basis(2, 1);
  MemberParams a{0.9, 0.9, "a"}, b{1.1, 1.1, "b"};

  TrainingSet training;
  training.members = {a, b};
  training.partition = {{"a", 1}, {"b", 1}};
  std::vector<ClassModel> classes{{"a", model, t_a}, {"b", model, t_b}};
  detail::EnsembleEvaluator evaluator(classes, training, grid, psi0, {0.5, 0.5});

  double prev = -1.0;
  for (int step = 0; step < 100; ++step) {
    auto eval = evaluator.evaluate(u, true);
    if (step > 0) CHECK(eval.objective >= prev - 1e-8);
    prev = eval.objective;
    u.values() += 0.01 * eval.gradient;
  }
}
