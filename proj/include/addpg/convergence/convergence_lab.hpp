#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "addpg/common.hpp"
#include "addpg/nn/dense_network.hpp"

namespace addpg::convergence {

/// Closed-form action-value function with a known gradient-Lipschitz constant.
struct AnalyticQ {
  std::string name;
  std::function<double(const Vector& state, const Vector& action)> value;
  std::function<Vector(const Vector& state, const Vector& action)> gradient;
  std::function<Vector(const Vector& state)> argmax;
  double lipschitz = 1.0;
  int action_dim = 1;
};

/// Q(s, a) = -c ||a - center||^2, L = 2c.
AnalyticQ make_quadratic_q(double curvature, const Vector& center);

/// Q(s, a) = -log(1 + ||a - center||^2). Concave on ||a - center|| < 1, L = 2.
AnalyticQ make_log_bump_q(const Vector& center);

struct IterationTrace {
  std::vector<Vector> actions;
  std::vector<double> values;
  std::vector<double> gradient_norms;

  std::size_t size() const { return actions.size(); }
};

/// Thrown when an iterate leaves the finite reals.
class DivergenceError : public Error {
 public:
  DivergenceError(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// a_{t+1} = a_t + beta * grad_A Q(s, a_t) for t = 0..k-1 (k+1 iterates).
IterationTrace iterate_policy(const AnalyticQ& q, const Vector& state, const Vector& a0, double beta, int steps);

struct MonotoneReport {
  bool improvement_holds = true;  // Q(a_{t+1}) - Q(a_t) >= beta (1 - beta L / 2) ||grad||^2 - tol at every t
  int failing_step = -1;
  double failing_lhs = 0.0;
  double failing_rhs = 0.0;
  double min_slack = 0.0;  // min over t of lhs - rhs

  double final_gradient_norm = 0.0;
  bool gradient_vanished = false;  // final norm below the gradient tolerance

  // Partial sums of ||grad||^2 against (Q* - Q(a0)) / (beta (1 - beta L / 2)); only when beta < 2/L.
  bool summability_checked = false;
  bool summability_holds = true;
  double gradient_square_sum = 0.0;
  double summability_bound = 0.0;

  bool passed(bool require_vanishing) const {
    return improvement_holds && summability_holds && (!require_vanishing || gradient_vanished);
  }
};

/// Checks the per-step improvement bound along a trace. Refuses beta outside (0, 2/L].
MonotoneReport verify_monotone(const IterationTrace& trace, const AnalyticQ& q, const Vector& state, double beta,
                               double tolerance = 1e-10, double gradient_tolerance = 1e-6);

struct SuiteCase {
  std::string family;
  double beta = 0.0;
  double lipschitz = 0.0;
  int steps = 0;
  bool boundary_step = false;  // beta == 2/L: no vanishing requirement
  IterationTrace trace;
  MonotoneReport report;
  bool passed = false;
};

struct SuiteReport {
  std::vector<SuiteCase> cases;
  bool all_passed() const;
};

/// Quadratic and log-bump families at beta in {0.01, 0.1, 0.5, 2/L}, `steps` iterations each.
SuiteReport run_convergence_suite(int steps = 10000);

void print_suite_report(std::ostream& os, const SuiteReport& report);
/// case,family,beta,t,q,grad_norm,a_0,... one row per iterate.
void write_suite_traces_csv(const std::string& path, const SuiteReport& report);

struct CriticDiagnostic {
  int steps = 0;
  int non_decreasing_steps = 0;
  double initial_q = 0.0;
  double final_q = 0.0;
  double final_gradient_norm = 0.0;
};

/// Runs the same ascent iteration against a learned critic at a fixed state.
/// Informational only: learned critics are not concave.
CriticDiagnostic diagnose_learned_critic(const nn::Network& critic, const Vector& state, const Vector& a0, double beta,
                                         int steps);

}  // namespace addpg::convergence
