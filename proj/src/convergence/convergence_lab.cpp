#include "addpg/convergence/convergence_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

namespace addpg::convergence {

AnalyticQ make_quadratic_q(double curvature, const Vector& center) {
  if (!(curvature > 0)) throw Error("quadratic curvature must be positive");
  if (center.size() < 1) throw Error("center needs at least one coordinate");
  AnalyticQ q;
  q.name = "quadratic";
  q.action_dim = static_cast<int>(center.size());
  q.lipschitz = 2.0 * curvature;
  q.value = [curvature, center](const Vector&, const Vector& a) { return -curvature * (a - center).squaredNorm(); };
  q.gradient = [curvature, center](const Vector&, const Vector& a) -> Vector { return -2.0 * curvature * (a - center); };
  q.argmax = [center](const Vector&) { return center; };
  return q;
}

AnalyticQ make_log_bump_q(const Vector& center) {
  if (center.size() < 1) throw Error("center needs at least one coordinate");
  AnalyticQ q;
  q.name = "log_bump";
  q.action_dim = static_cast<int>(center.size());
  // Hessian eigenvalues are -2/(1+r^2) and 2(r^2-1)/(1+r^2)^2, both bounded by 2 in magnitude.
  q.lipschitz = 2.0;
  q.value = [center](const Vector&, const Vector& a) { return -std::log1p((a - center).squaredNorm()); };
  q.gradient = [center](const Vector&, const Vector& a) -> Vector {
    const Vector d = a - center;
    return (-2.0 / (1.0 + d.squaredNorm())) * d;
  };
  q.argmax = [center](const Vector&) { return center; };
  return q;
}

IterationTrace iterate_policy(const AnalyticQ& q, const Vector& state, const Vector& a0, double beta, int steps) {
  if (steps < 1) throw Error("iterate_policy needs at least one step");
  if (!(beta > 0)) throw Error("beta must be positive");
  if (a0.size() != q.action_dim) throw Error("initial action has the wrong dimension");
  IterationTrace tr;
  tr.actions.reserve(static_cast<std::size_t>(steps) + 1);
  tr.values.reserve(static_cast<std::size_t>(steps) + 1);
  tr.gradient_norms.reserve(static_cast<std::size_t>(steps) + 1);

  Vector a = a0;
  for (int t = 0;; ++t) {
    const Vector g = q.gradient(state, a);
    const double v = q.value(state, a);
    if (!a.allFinite() || !g.allFinite() || !std::isfinite(v))
      throw DivergenceError(t, "policy iteration diverged at step " + std::to_string(t));
    tr.actions.push_back(a);
    tr.values.push_back(v);
    tr.gradient_norms.push_back(g.norm());
    if (t == steps) break;
    a = a + beta * g;
  }
  return tr;
}

MonotoneReport verify_monotone(const IterationTrace& trace, const AnalyticQ& q, const Vector& state, double beta,
                               double tolerance, double gradient_tolerance) {
  const double limit = 2.0 / q.lipschitz;
  if (!(beta > 0) || beta > limit * (1.0 + 1e-12))
    throw Error("beta = " + std::to_string(beta) + " is outside (0, 2/L] with 2/L = " + std::to_string(limit));
  if (trace.size() < 1 || trace.values.size() != trace.size() || trace.gradient_norms.size() != trace.size())
    throw Error("malformed iteration trace");

  MonotoneReport r;
  const double factor = beta * (1.0 - beta * q.lipschitz / 2.0);
  r.min_slack = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    const double g2 = trace.gradient_norms[t] * trace.gradient_norms[t];
    const double lhs = trace.values[t + 1] - trace.values[t];
    const double rhs = factor * g2;
    sum += g2;
    r.min_slack = std::min(r.min_slack, lhs - rhs);
    if (lhs < rhs - tolerance && r.improvement_holds) {
      r.improvement_holds = false;
      r.failing_step = static_cast<int>(t);
      r.failing_lhs = lhs;
      r.failing_rhs = rhs;
    }
  }
  if (trace.size() == 1) r.min_slack = 0.0;
  r.final_gradient_norm = trace.gradient_norms.back();
  r.gradient_vanished = r.final_gradient_norm < gradient_tolerance;
  r.gradient_square_sum = sum;
  if (factor > 0 && beta < limit) {
    r.summability_checked = true;
    const double q_star = q.value(state, q.argmax(state));
    r.summability_bound = (q_star - trace.values.front()) / factor;
    r.summability_holds = sum <= r.summability_bound * (1.0 + 1e-9) + tolerance;
  }
  return r;
}

bool SuiteReport::all_passed() const {
  return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const SuiteCase& c) { return c.passed; });
}

SuiteReport run_convergence_suite(int steps) {
  struct Instance {
    AnalyticQ q;
    Vector a0;
  };
  std::vector<Instance> family;
  {
    Vector c1(1), s1(1);
    c1 << 2.0;
    s1 << 0.0;
    Vector c3(3), s3(3);
    c3 << 0.5, -1.0, 1.5;
    s3 << -1.0, 2.0, 0.25;
    family.push_back({make_quadratic_q(1.0, c1), s1});
    family.push_back({make_quadratic_q(0.25, c3), s3});
    family.push_back({make_quadratic_q(2.0, c1), s1});
    Vector b1(1), a1(1);
    b1 << -0.5;
    a1 << 0.3;  // r = 0.8, inside the concave region
    Vector b2(2), a2(2);
    b2 << 1.0, 1.0;
    a2 << 1.4, 0.7;  // r = 0.5
    family.push_back({make_log_bump_q(b1), a1});
    family.push_back({make_log_bump_q(b2), a2});
  }

  const Vector state = Vector::Zero(1);
  SuiteReport report;
  for (const auto& inst : family) {
    const double boundary = 2.0 / inst.q.lipschitz;
    for (double beta : {0.01, 0.1, 0.5, boundary}) {
      if (beta > boundary * (1.0 + 1e-12)) continue;
      SuiteCase c;
      c.family = inst.q.name;
      c.beta = beta;
      c.lipschitz = inst.q.lipschitz;
      c.steps = steps;
      c.boundary_step = std::abs(beta - boundary) <= 1e-12 * boundary;
      c.trace = iterate_policy(inst.q, state, inst.a0, beta, steps);
      c.report = verify_monotone(c.trace, inst.q, state, beta);
      c.passed = c.report.passed(!c.boundary_step);
      report.cases.push_back(std::move(c));
    }
  }
  return report;
}

void print_suite_report(std::ostream& os, const SuiteReport& report) {
  os << std::setprecision(6);
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    os << (c.passed ? "PASS" : "FAIL") << "  case " << i << "  " << c.family << "  L=" << c.lipschitz
       << "  beta=" << c.beta << (c.boundary_step ? " (=2/L)" : "") << "  steps=" << c.steps
       << "  min_slack=" << c.report.min_slack << "  final_grad=" << c.report.final_gradient_norm;
    if (!c.report.improvement_holds)
      os << "  violated at t=" << c.report.failing_step << " lhs=" << c.report.failing_lhs
         << " rhs=" << c.report.failing_rhs;
    if (c.report.summability_checked && !c.report.summability_holds)
      os << "  gradient sum " << c.report.gradient_square_sum << " exceeds " << c.report.summability_bound;
    os << '\n';
  }
  os << (report.all_passed() ? "all checks passed" : "some checks failed") << '\n';
}

void write_suite_traces_csv(const std::string& path, const SuiteReport& report) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "case,family,beta,t,q,grad_norm,action\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    for (std::size_t t = 0; t < c.trace.size(); ++t) {
      os << i << ',' << c.family << ',' << c.beta << ',' << t << ',' << c.trace.values[t] << ','
         << c.trace.gradient_norms[t] << ',';
      const Vector& a = c.trace.actions[t];
      for (Eigen::Index k = 0; k < a.size(); ++k) os << (k ? ";" : "") << a(k);
      os << '\n';
    }
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

CriticDiagnostic diagnose_learned_critic(const nn::Network& critic, const Vector& state, const Vector& a0, double beta,
                                         int steps) {
  if (critic.input_size() != state.size() + a0.size() || critic.output_size() != 1)
    throw Error("critic does not accept this (state, action) shape");
  Vector in(critic.input_size());
  in.head(state.size()) = state;
  auto eval = [&](const Vector& a, Vector* grad) {
    in.tail(a.size()) = a;
    if (grad) {
      auto [params, g] = critic.backward(in, Vector::Ones(1));
      *grad = g.tail(a.size());
    }
    return critic.forward(in)(0);
  };
  CriticDiagnostic d;
  d.steps = steps;
  Vector a = a0, g;
  double q = eval(a, &g);
  d.initial_q = q;
  for (int t = 0; t < steps; ++t) {
    a += beta * g;
    const double next = eval(a, &g);
    if (next >= q) ++d.non_decreasing_steps;
    q = next;
  }
  d.final_q = q;
  d.final_gradient_norm = g.norm();
  return d;
}

}  // namespace addpg::convergence
